#pragma once

#include "panelsde/linalg.hpp"

namespace panelsde {

// Precomputed factorization of a covariance matrix, reusable across many
// density evaluations with the same covariance.
struct GaussianKernel {
    EigenSym eig;       // eigenvalues clamped copy kept in inv_values
    Vec inv_values;     // 1 / max(lambda, kEigenFloor)
    double log_norm;    // -(d/2) ln(2 pi) - 1/2 ln det
    int d = 0;

    double logpdf(const Vec& x, const Vec& mean) const;
};

// Builds the reusable kernel. Throws DegenerateCovarianceError when the
// covariance has non-finite entries, an eigenvalue below -1e-8, or a
// non-finite log-determinant after clamping at kEigenFloor.
GaussianKernel gaussian_kernel(const Mat& cov);

// log N(x | mean, cov) with eigenvalues clamped at kEigenFloor.
double gaussian_logpdf(const Vec& x, const Vec& mean, const Mat& cov);

// Product of independent 1-d Gaussians with standard deviations sd.
double gaussian_logpdf_diag(const Vec& x, const Vec& mean, const Vec& sd);

// ln ( 1/(sqrt(2 pi) sd) exp(-z^2/2) ) for a single coordinate.
double normal_logpdf(double x, double mean, double sd);

}  // namespace panelsde
