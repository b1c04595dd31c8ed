#include "panelsde/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace panelsde {

Vec vec_add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec vec_sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec vec_scale(const Vec& a, double s) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

void vec_axpy(Vec& y, double s, const Vec& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

double vec_dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double vec_norm(const Vec& a) { return std::sqrt(vec_dot(a, a)); }

bool vec_finite(const Vec& a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat mat_mul(const Mat& a, const Mat& b) {
    Mat r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

Vec mat_vec(const Mat& a, const Vec& x) {
    Vec r(static_cast<size_t>(a.rows()), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

Mat mat_transpose(const Mat& a) {
    Mat r(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

Mat mat_add(const Mat& a, const Mat& b) {
    Mat r(a.rows(), a.cols());
    for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] = a.data()[i] + b.data()[i];
    return r;
}

Mat mat_scale(const Mat& a, double s) {
    Mat r(a.rows(), a.cols());
    for (size_t i = 0; i < r.data().size(); ++i) r.data()[i] = a.data()[i] * s;
    return r;
}

Mat vec_outer(const Vec& a, const Vec& b) {
    Mat r(static_cast<int>(a.size()), static_cast<int>(b.size()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r(static_cast<int>(i), static_cast<int>(j)) = a[i] * b[j];
    return r;
}

double mat_maxabs(const Mat& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

bool mat_finite(const Mat& a) {
    for (double v : a.data())
        if (!std::isfinite(v)) return false;
    return true;
}

double mat_trace(const Mat& a) {
    double s = 0.0;
    for (int i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
    return s;
}

double symmetry_defect(const Mat& a) {
    double defect = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j)
            defect = std::max(defect, std::abs(a(i, j) - a(j, i)));
    return defect / std::max(1.0, mat_maxabs(a));
}

Mat symmetrize(const Mat& a) {
    Mat r(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(i, j) = 0.5 * (a(i, j) + a(j, i));
    return r;
}

namespace {

// One cyclic sweep of Jacobi rotations over the upper triangle of A,
// accumulating the rotations into V. Returns the off-diagonal Frobenius norm
// after the sweep.
double jacobi_sweep(Mat& A, Mat& V) {
    const int n = A.rows();
    for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
            const double apq = A(p, q);
            if (apq == 0.0) continue;
            const double app = A(p, p);
            const double aqq = A(q, q);
            const double tau = (aqq - app) / (2.0 * apq);
            double t;
            if (std::abs(tau) > 1e150) {
                t = 0.5 / tau;
            } else {
                const double sign = tau >= 0.0 ? 1.0 : -1.0;
                t = sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
            }
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = t * c;

            for (int k = 0; k < n; ++k) {
                const double akp = A(k, p);
                const double akq = A(k, q);
                A(k, p) = c * akp - s * akq;
                A(k, q) = s * akp + c * akq;
            }
            for (int k = 0; k < n; ++k) {
                const double apk = A(p, k);
                const double aqk = A(q, k);
                A(p, k) = c * apk - s * aqk;
                A(q, k) = s * apk + c * aqk;
            }
            for (int k = 0; k < n; ++k) {
                const double vkp = V(k, p);
                const double vkq = V(k, q);
                V(k, p) = c * vkp - s * vkq;
                V(k, q) = s * vkp + c * vkq;
            }
        }
    }
    double off = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    return std::sqrt(2.0 * off);
}

}  // namespace

EigenSym sym_eigendecompose(const Mat& m, double sym_tol) {
    if (m.rows() != m.cols()) throw ShapeError("eigendecomposition requires a square matrix");
    if (symmetry_defect(m) > sym_tol)
        throw SymmetryError("matrix is not symmetric within tolerance");
    const int n = m.rows();
    Mat A = symmetrize(m);
    Mat V = Mat::identity(n);

    const double scale = std::max(1.0, mat_maxabs(A));
    const double tol = 1e-14 * scale * n;
    for (int sweep = 0; sweep < 64; ++sweep) {
        if (jacobi_sweep(A, V) <= tol) break;
    }

    EigenSym e;
    e.values.resize(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Vec diag(n);
    for (int i = 0; i < n; ++i) diag[i] = A(i, i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (diag[a] != diag[b]) return diag[a] > diag[b];
        // Exact ties: order lexicographically by (sign-normalized) eigenvector.
        for (int k = 0; k < n; ++k) {
            double va = V(k, a), vb = V(k, b);
            if (va != vb) return va < vb;
        }
        return false;
    });

    e.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        e.values[j] = diag[src];
        double sign = 1.0;
        for (int k = 0; k < n; ++k) {
            if (V(k, src) != 0.0) {
                sign = V(k, src) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (int k = 0; k < n; ++k) e.vectors(k, j) = sign * V(k, src);
    }
    return e;
}

namespace {

Mat eigen_apply(const EigenSym& e, double (*f)(double)) {
    const int n = static_cast<int>(e.values.size());
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += e.vectors(i, k) * f(e.values[k]) * e.vectors(j, k);
            r(i, j) = s;
            r(j, i) = s;
        }
    return r;
}

void check_psd(const EigenSym& e) {
    for (double v : e.values)
        if (v < -1e-8) throw NotPsdError("matrix has eigenvalue below -1e-8");
}

}  // namespace

Mat psd_sqrt(const Mat& m) {
    EigenSym e = sym_eigendecompose(m, 1e-9);
    check_psd(e);
    return eigen_apply(e, [](double v) { return std::sqrt(std::max(v, kEigenFloor)); });
}

Mat psd_inv_sqrt(const Mat& m) {
    EigenSym e = sym_eigendecompose(m, 1e-9);
    check_psd(e);
    return eigen_apply(e, [](double v) { return 1.0 / std::sqrt(std::max(v, kEigenFloor)); });
}

Mat cholesky(const Mat& a) {
    if (a.rows() != a.cols()) throw ShapeError("cholesky requires a square matrix");
    const int n = a.rows();
    Mat L(n, n);
    double dmax = 0.0;
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw ConditioningError("cholesky pivot " + std::to_string(j) +
                                    " not positive (pivot=" + std::to_string(d) +
                                    ", max diag=" + std::to_string(dmax) + ")");
        }
        dmax = std::max(dmax, d);
        L(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

Vec chol_solve(const Mat& L, const Vec& b) {
    const int n = L.rows();
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
        y[i] = s / L(i, i);
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
        x[i] = s / L(i, i);
    }
    return x;
}

double chol_logdet(const Mat& L) {
    double s = 0.0;
    for (int i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
}

}  // namespace panelsde
