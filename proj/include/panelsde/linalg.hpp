#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "panelsde/errors.hpp"

namespace panelsde {

using Vec = std::vector<double>;

// Eigenvalue floor applied wherever a PSD matrix is inverted or square-rooted.
inline constexpr double kEigenFloor = 1e-9;

// Dense row-major matrix. Sized for the small state dimensions this library
// works with (d up to ~20 for states, up to ~64 for Gram matrices).
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(const Vec& d) {
        Mat m(static_cast<int>(d.size()), static_cast<int>(d.size()));
        for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

// --- vector helpers ---

Vec vec_add(const Vec& a, const Vec& b);
Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_scale(const Vec& a, double s);
// y += s * x
void vec_axpy(Vec& y, double s, const Vec& x);
double vec_dot(const Vec& a, const Vec& b);
double vec_norm(const Vec& a);
bool vec_finite(const Vec& a);

// --- matrix helpers ---

Mat mat_mul(const Mat& a, const Mat& b);
Vec mat_vec(const Mat& a, const Vec& x);
Mat mat_transpose(const Mat& a);
Mat mat_add(const Mat& a, const Mat& b);
Mat mat_scale(const Mat& a, double s);
Mat vec_outer(const Vec& a, const Vec& b);
double mat_maxabs(const Mat& a);
bool mat_finite(const Mat& a);
double mat_trace(const Mat& a);

// max |a_ij - a_ji| relative to max(1, maxabs).
double symmetry_defect(const Mat& a);
// (a + a^T) / 2
Mat symmetrize(const Mat& a);

struct EigenSym {
    Vec values;   // descending
    Mat vectors;  // orthonormal, eigenvector i in column i
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues are
// returned in descending order; each eigenvector has its first nonzero
// component forced positive, and exact ties are ordered lexicographically by
// eigenvector so the output is deterministic.
// Throws SymmetryError if the input is not symmetric to 1e-12 relative.
EigenSym sym_eigendecompose(const Mat& m, double sym_tol = 1e-12);

// Symmetric PSD square root: U diag(sqrt(max(lambda, kEigenFloor))) U^T.
// Throws NotPsdError if any eigenvalue is below -1e-8.
Mat psd_sqrt(const Mat& m);

// Inverse of psd_sqrt's result without forming it twice: U diag(1/sqrt(.)) U^T.
Mat psd_inv_sqrt(const Mat& m);

// Cholesky factorization of a symmetric positive definite matrix; returns the
// lower factor L. Throws ConditioningError (with a condition estimate from the
// diagonal of L) when a pivot is not positive.
Mat cholesky(const Mat& a);
Vec chol_solve(const Mat& L, const Vec& b);
// log det A = 2 sum log L_ii
double chol_logdet(const Mat& L);

}  // namespace panelsde
