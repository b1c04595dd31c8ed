#include <algorithm>
#include <cmath>

#include "panelsde/errors.hpp"
#include "panelsde/npsde.hpp"

namespace panelsde::npsde {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

double SqExpKernel::variance() const { return std::exp(log_var); }
double SqExpKernel::length(int l) const { return std::exp(log_length[l]); }

double SqExpKernel::eval(const Vec& a, const Vec& b) const {
    double q = 0.0;
    for (size_t l = 0; l < a.size(); ++l) {
        const double ell = std::exp(log_length[l]);
        const double diff = (a[l] - b[l]) / ell;
        q += diff * diff;
    }
    return variance() * std::exp(-0.5 * q);
}

Mat SqExpKernel::gram(const std::vector<Vec>& pts, double jitter) const {
    const int n = static_cast<int>(pts.size());
    Mat K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            K(i, j) = eval(pts[i], pts[j]);
            K(j, i) = K(i, j);
        }
        K(i, i) += jitter;
    }
    return K;
}

NpsdeModel::NpsdeModel(std::vector<Vec> inducing, SqExpKernel kernel_f, SqExpKernel kernel_b,
                       Mat u_f, Vec u_b, Vec log_r, double jitter, double dt_sim,
                       double restart_factor)
    : d_(inducing.empty() ? 0 : static_cast<int>(inducing[0].size())),
      inducing_(std::move(inducing)),
      kf_(std::move(kernel_f)),
      kb_(std::move(kernel_b)),
      u_f_(std::move(u_f)),
      u_b_(std::move(u_b)),
      log_r_(std::move(log_r)),
      jitter_(jitter),
      dt_sim_(dt_sim),
      restart_factor_(restart_factor) {
    if (inducing_.empty()) throw InputError("need at least one inducing point");
    for (size_t a = 0; a < inducing_.size(); ++a)
        for (size_t b = a + 1; b < inducing_.size(); ++b)
            if (inducing_[a] == inducing_[b])
                throw InputError("inducing locations must be pairwise distinct");
    if (u_f_.rows() != m() || u_f_.cols() != d_ || static_cast<int>(u_b_.size()) != m() ||
        static_cast<int>(log_r_.size()) != d_)
        throw ShapeError("inducing value arrays do not match M and d");
    refresh();
}

void NpsdeModel::refresh() {
    const Mat Kf = kf_.gram(inducing_, jitter_);
    const Mat Kb = kb_.gram(inducing_, jitter_);
    chol_f_ = cholesky(Kf);
    chol_b_ = cholesky(Kb);
    logdet_f_ = chol_logdet(chol_f_);
    logdet_b_ = chol_logdet(chol_b_);
    gram0_f_ = kf_.gram(inducing_, 0.0);
    gram0_b_ = kb_.gram(inducing_, 0.0);

    beta_f_ = Mat(m(), d_);
    for (int i = 0; i < d_; ++i) {
        Vec col(m());
        for (int a = 0; a < m(); ++a) col[a] = u_f_(a, i);
        const Vec sol = chol_solve(chol_f_, col);
        for (int a = 0; a < m(); ++a) beta_f_(a, i) = sol[a];
    }
    beta_b_ = chol_solve(chol_b_, u_b_);

    // dK/dh times beta for each kernel hyperparameter: h = log variance gives
    // dK = K0; h = log lengthscale l gives dK_ab = K0_ab (dz_l / ell_l)^2.
    auto hyper_grams = [this](const SqExpKernel& k, const Mat& K0) {
        std::vector<Mat> out;
        out.push_back(K0);
        for (int l = 0; l < d_; ++l) {
            const double ell2 = k.length(l) * k.length(l);
            Mat dK(m(), m());
            for (int a = 0; a < m(); ++a)
                for (int b = 0; b < m(); ++b) {
                    const double dz = inducing_[a][l] - inducing_[b][l];
                    dK(a, b) = K0(a, b) * dz * dz / ell2;
                }
            out.push_back(dK);
        }
        return out;
    };
    dk_beta_f_.clear();
    for (const Mat& dK : hyper_grams(kf_, gram0_f_)) dk_beta_f_.push_back(mat_mul(dK, beta_f_));
    dk_beta_b_.clear();
    for (const Mat& dK : hyper_grams(kb_, gram0_b_))
        dk_beta_b_.push_back(mat_vec(dK, beta_b_));
}

Vec NpsdeModel::drift(const Vec& x) const {
    Vec f(d_, 0.0);
    for (int a = 0; a < m(); ++a) {
        const double k = kf_.eval(x, inducing_[a]);
        for (int i = 0; i < d_; ++i) f[i] += k * beta_f_(a, i);
    }
    return f;
}

double NpsdeModel::amplitude(const Vec& x) const {
    double b = 0.0;
    for (int a = 0; a < m(); ++a) b += kb_.eval(x, inducing_[a]) * beta_b_[a];
    return b;
}

Mat NpsdeModel::diffusion(const Vec& x) const {
    const double b = amplitude(x);
    return mat_scale(Mat::identity(d_), 0.5 * b * b);
}

int NpsdeModel::param_count() const { return m() * d_ + m() + 2 * (1 + d_) + d_; }

Vec NpsdeModel::params() const {
    Vec theta;
    theta.reserve(param_count());
    for (int a = 0; a < m(); ++a)
        for (int i = 0; i < d_; ++i) theta.push_back(u_f_(a, i));
    theta.insert(theta.end(), u_b_.begin(), u_b_.end());
    theta.push_back(kf_.log_var);
    theta.insert(theta.end(), kf_.log_length.begin(), kf_.log_length.end());
    theta.push_back(kb_.log_var);
    theta.insert(theta.end(), kb_.log_length.begin(), kb_.log_length.end());
    theta.insert(theta.end(), log_r_.begin(), log_r_.end());
    return theta;
}

void NpsdeModel::set_params(const Vec& theta) {
    if (static_cast<int>(theta.size()) != param_count())
        throw ShapeError("parameter vector has wrong length");
    size_t p = 0;
    for (int a = 0; a < m(); ++a)
        for (int i = 0; i < d_; ++i) u_f_(a, i) = theta[p++];
    for (int a = 0; a < m(); ++a) u_b_[a] = theta[p++];
    kf_.log_var = theta[p++];
    for (int l = 0; l < d_; ++l) kf_.log_length[l] = theta[p++];
    kb_.log_var = theta[p++];
    for (int l = 0; l < d_; ++l) kb_.log_length[l] = theta[p++];
    for (int l = 0; l < d_; ++l) log_r_[l] = theta[p++];
    refresh();
}

Vec NpsdeModel::r_diag() const {
    Vec r(d_);
    for (int l = 0; l < d_; ++l) r[l] = std::exp(log_r_[l]);
    return r;
}

double NpsdeModel::log_prior() const {
    double lp = 0.0;
    // Zero-mean GP over each drift output dimension and over the amplitude.
    for (int i = 0; i < d_; ++i) {
        double quad = 0.0;
        for (int a = 0; a < m(); ++a) quad += u_f_(a, i) * beta_f_(a, i);
        lp += -0.5 * quad - 0.5 * logdet_f_ - 0.5 * m() * kLog2Pi;
    }
    double quad_b = 0.0;
    for (int a = 0; a < m(); ++a) quad_b += u_b_[a] * beta_b_[a];
    lp += -0.5 * quad_b - 0.5 * logdet_b_ - 0.5 * m() * kLog2Pi;
    // Standard-normal hyperpriors on every log-parameter.
    auto normal0 = [&lp](double h) { lp += -0.5 * kLog2Pi - 0.5 * h * h; };
    normal0(kf_.log_var);
    for (double h : kf_.log_length) normal0(h);
    normal0(kb_.log_var);
    for (double h : kb_.log_length) normal0(h);
    for (double h : log_r_) normal0(h);
    return lp;
}

void NpsdeModel::log_prior_grad(Vec& grad) const {
    size_t p = 0;
    for (int a = 0; a < m(); ++a)
        for (int i = 0; i < d_; ++i) grad[p++] += -beta_f_(a, i);
    for (int a = 0; a < m(); ++a) grad[p++] += -beta_b_[a];

    // d/dh of a GP term: 1/2 beta^T dK beta - 1/2 tr(K^{-1} dK) summed over
    // the output columns sharing that kernel, plus the -h hyperprior pull.
    const int n_hyper = 1 + d_;
    Mat beta_b_mat(m(), 1);
    for (int a = 0; a < m(); ++a) beta_b_mat(a, 0) = beta_b_[a];

    for (int which = 0; which < 2; ++which) {
        const bool is_f = which == 0;
        const Mat& cholK = is_f ? chol_f_ : chol_b_;
        const Mat& K0 = is_f ? gram0_f_ : gram0_b_;
        const SqExpKernel& k = is_f ? kf_ : kb_;
        const Mat& beta = is_f ? beta_f_ : beta_b_mat;
        const int n_cols = is_f ? d_ : 1;
        for (int h = 0; h < n_hyper; ++h) {
            Mat dK = K0;
            if (h > 0) {
                const int l = h - 1;
                const double ell2 = k.length(l) * k.length(l);
                for (int a = 0; a < m(); ++a)
                    for (int b = 0; b < m(); ++b) {
                        const double dz = inducing_[a][l] - inducing_[b][l];
                        dK(a, b) *= dz * dz / ell2;
                    }
            }
            double quad = 0.0;
            for (int i = 0; i < n_cols; ++i) {
                Vec bi(m());
                for (int a = 0; a < m(); ++a) bi[a] = beta(a, i);
                quad += vec_dot(bi, mat_vec(dK, bi));
            }
            double trace = 0.0;
            for (int a = 0; a < m(); ++a) {
                Vec col(m());
                for (int b = 0; b < m(); ++b) col[b] = dK(b, a);
                trace += chol_solve(cholK, col)[a];
            }
            const double hyper_value = h == 0 ? k.log_var : k.log_length[h - 1];
            grad[p++] += 0.5 * quad - 0.5 * n_cols * trace - hyper_value;
        }
    }
    for (int l = 0; l < d_; ++l) grad[p++] += -log_r_[l];
}

std::vector<Vec> inducing_grid(const LatentPanel& lp, int per_dim, int cap) {
    if (lp.units.empty()) throw InsufficientDataError("empty panel: no inducing grid");
    const int d = lp.dim();
    Vec lo(d, std::numeric_limits<double>::infinity());
    Vec hi(d, -std::numeric_limits<double>::infinity());
    for (const auto& u : lp.units)
        for (const auto& x : u.states)
            for (int l = 0; l < d; ++l) {
                lo[l] = std::min(lo[l], x[l]);
                hi[l] = std::max(hi[l], x[l]);
            }
    for (int l = 0; l < d; ++l) {
        const double pad = 0.1 * std::max(hi[l] - lo[l], 1e-6);
        lo[l] -= pad;
        hi[l] += pad;
    }
    per_dim = std::max(1, per_dim);
    while (std::pow(static_cast<double>(per_dim), d) > cap && per_dim > 1) --per_dim;

    std::vector<Vec> grid;
    Vec point(d, 0.0);
    std::vector<int> idx(d, 0);
    while (true) {
        for (int l = 0; l < d; ++l)
            point[l] = per_dim == 1 ? 0.5 * (lo[l] + hi[l])
                                    : lo[l] + (hi[l] - lo[l]) * idx[l] / (per_dim - 1);
        grid.push_back(point);
        int l = 0;
        for (; l < d; ++l) {
            if (++idx[l] < per_dim) break;
            idx[l] = 0;
        }
        if (l == d) break;
    }
    return grid;
}

NpsdeModel NpsdeModel::init_from_panel(const LatentPanel& lp, const NpsdeConfig& cfg) {
    const int d = lp.dim();
    std::vector<Vec> Z = inducing_grid(lp, cfg.grid_per_dim);
    const int M = static_cast<int>(Z.size());

    // Per-dimension spread sets the lengthscale guess; the pooled
    // displacement scale sets the amplitude guess.
    Vec mean(d, 0.0), var(d, 0.0);
    size_t n = 0;
    for (const auto& u : lp.units)
        for (const auto& x : u.states) {
            for (int l = 0; l < d; ++l) mean[l] += x[l];
            ++n;
        }
    for (int l = 0; l < d; ++l) mean[l] /= static_cast<double>(n);
    for (const auto& u : lp.units)
        for (const auto& x : u.states)
            for (int l = 0; l < d; ++l) var[l] += (x[l] - mean[l]) * (x[l] - mean[l]);
    for (int l = 0; l < d; ++l) var[l] /= static_cast<double>(std::max<size_t>(1, n - 1));

    double disp = 0.0;
    size_t n_trans = 0;
    for (const auto& u : lp.units)
        for (size_t k = 0; k + 1 < u.states.size(); ++k) {
            const double dt = u.times[k + 1] - u.times[k];
            for (int l = 0; l < d; ++l) {
                const double dx = u.states[k + 1][l] - u.states[k][l];
                disp += dx * dx / dt;
            }
            ++n_trans;
        }
    const double b0 = n_trans > 0 ? std::sqrt(disp / (static_cast<double>(n_trans) * d)) : 1.0;

    SqExpKernel kf, kb;
    kf.log_var = 0.0;
    kb.log_var = 0.0;
    kf.log_length.resize(d);
    kb.log_length.resize(d);
    for (int l = 0; l < d; ++l) {
        const double ell = std::sqrt(std::max(var[l], 1e-6));
        kf.log_length[l] = std::log(ell);
        kb.log_length[l] = std::log(ell);
    }

    Mat u_f(M, d);  // zero drift start
    Vec u_b(M, b0);
    Vec log_r(d);
    for (int l = 0; l < d; ++l) log_r[l] = std::log(std::max(0.01 * var[l], 1e-6));
    return NpsdeModel(std::move(Z), kf, kb, std::move(u_f), std::move(u_b), std::move(log_r),
                      cfg.jitter, cfg.dt_sim, cfg.restart_factor);
}

}  // namespace panelsde::npsde
