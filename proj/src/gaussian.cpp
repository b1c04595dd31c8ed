#include "panelsde/gaussian.hpp"

#include <cmath>

namespace panelsde {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

double GaussianKernel::logpdf(const Vec& x, const Vec& mean) const {
    double q = 0.0;
    for (int k = 0; k < d; ++k) {
        double proj = 0.0;
        for (int i = 0; i < d; ++i) proj += eig.vectors(i, k) * (x[i] - mean[i]);
        q += proj * proj * inv_values[k];
    }
    return log_norm - 0.5 * q;
}

GaussianKernel gaussian_kernel(const Mat& cov) {
    if (!mat_finite(cov)) throw DegenerateCovarianceError("covariance has non-finite entries");
    GaussianKernel k;
    k.d = cov.rows();
    try {
        k.eig = sym_eigendecompose(cov, 1e-9);
    } catch (const SymmetryError&) {
        k.eig = sym_eigendecompose(symmetrize(cov), 1e-9);
    }
    double logdet = 0.0;
    k.inv_values.resize(k.d);
    for (int i = 0; i < k.d; ++i) {
        const double lam = k.eig.values[i];
        if (lam < -1e-8) throw DegenerateCovarianceError("covariance is not positive semidefinite");
        const double clamped = std::max(lam, kEigenFloor);
        k.inv_values[i] = 1.0 / clamped;
        logdet += std::log(clamped);
    }
    if (!std::isfinite(logdet))
        throw DegenerateCovarianceError("covariance is singular after eigenvalue clamping");
    k.log_norm = -0.5 * k.d * kLog2Pi - 0.5 * logdet;
    return k;
}

double gaussian_logpdf(const Vec& x, const Vec& mean, const Mat& cov) {
    if (static_cast<int>(x.size()) != cov.rows() || x.size() != mean.size())
        throw ShapeError("gaussian_logpdf: dimension mismatch");
    return gaussian_kernel(cov).logpdf(x, mean);
}

double gaussian_logpdf_diag(const Vec& x, const Vec& mean, const Vec& sd) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += normal_logpdf(x[i], mean[i], sd[i]);
    return s;
}

double normal_logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * kLog2Pi - std::log(sd) - 0.5 * z * z;
}

}  // namespace panelsde
