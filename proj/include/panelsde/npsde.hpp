#pragma once

#include <cstdint>
#include <vector>

#include "panelsde/pca.hpp"
#include "panelsde/rng.hpp"
#include "panelsde/sde_model.hpp"

namespace panelsde::npsde {

// Squared-exponential kernel with one lengthscale per input dimension.
// Positive hyperparameters live in log space so optimization is
// unconstrained.
struct SqExpKernel {
    double log_var = 0.0;
    Vec log_length;

    double variance() const;
    double length(int l) const;
    double eval(const Vec& a, const Vec& b) const;
    Mat gram(const std::vector<Vec>& pts, double jitter) const;
};

struct NpsdeConfig {
    int grid_per_dim = 5;  // inducing grid points per dimension, total capped at 64
    int S = 128;           // Monte-Carlo paths per unit
    int iterations = 300;
    double lr = 0.02;
    double dt_sim = 0.05;  // target integration sub-step
    double jitter = 1e-6;
    bool fit_R = true;     // observation-noise variances trained vs frozen
    double restart_factor = 50.0;  // gaps longer than this times dt_sim restart the path
};

struct FitLog {
    std::vector<double> objectives;  // one per iteration
    double final_grad_norm = 0.0;
    bool underparameterized = false;  // parameter count exceeded transition count
    NpsdeConfig config;
};

// Drift interpolated from M inducing values per output dimension, scalar
// amplitude field b the same way, diffusion D(x) = 1/2 b(x)^2 I. Gram
// factorizations are cached and refreshed whenever parameters change.
//
// The parameter vector is [U_F row-major, U_b, kF.log_var, kF.log_length,
// kb.log_var, kb.log_length, log R diagonal].
class NpsdeModel : public SdeModel {
public:
    NpsdeModel() = default;
    NpsdeModel(std::vector<Vec> inducing, SqExpKernel kernel_f, SqExpKernel kernel_b,
               Mat u_f, Vec u_b, Vec log_r, double jitter, double dt_sim,
               double restart_factor);

    // Zero drift, constant amplitude guess, hyperparameters from data spread;
    // inducing points on a uniform grid over the data bounding box + 10%.
    static NpsdeModel init_from_panel(const LatentPanel& lp, const NpsdeConfig& cfg);

    int dim() const override { return d_; }
    Vec drift(const Vec& x) const override;
    Mat diffusion(const Vec& x) const override;
    double amplitude(const Vec& x) const;

    int param_count() const;
    Vec params() const;
    void set_params(const Vec& theta);

    int m() const { return static_cast<int>(inducing_.size()); }
    const std::vector<Vec>& inducing() const { return inducing_; }
    const Mat& u_f() const { return u_f_; }
    const Vec& u_b() const { return u_b_; }
    const SqExpKernel& kernel_f() const { return kf_; }
    const SqExpKernel& kernel_b() const { return kb_; }
    const Vec& log_r() const { return log_r_; }
    Vec r_diag() const;
    double jitter() const { return jitter_; }
    double dt_sim() const { return dt_sim_; }
    double restart_factor() const { return restart_factor_; }

    // Log prior over inducing values (zero-mean GP under the current kernels)
    // and standard-normal hyperpriors on all log-parameters; gradient in
    // parameter-vector layout.
    double log_prior() const;
    void log_prior_grad(Vec& grad) const;

    struct Eval;  // per-state kernel vectors and their derivatives

private:
    friend class PathPropagator;

    void refresh();

    int d_ = 0;
    std::vector<Vec> inducing_;
    SqExpKernel kf_, kb_;
    Mat u_f_;   // M x d
    Vec u_b_;   // M
    Vec log_r_; // d
    double jitter_ = 1e-6;
    double dt_sim_ = 0.05;
    double restart_factor_ = 50.0;

    // Refreshed caches.
    Mat chol_f_, chol_b_;   // Cholesky factors of the jittered Grams
    Mat beta_f_;            // K_F^{-1} U_F, M x d
    Vec beta_b_;            // K_b^{-1} U_b
    Mat gram0_f_, gram0_b_; // Grams without jitter
    double logdet_f_ = 0.0, logdet_b_ = 0.0;
    // Per kernel hyperparameter h: (dK/dh) beta, reused by every state.
    std::vector<Mat> dk_beta_f_;  // (d+1) entries, each M x d
    std::vector<Vec> dk_beta_b_;  // (d+1) entries, each M
};

// Evenly spaced grid over the per-dimension data range expanded by 10%;
// per-dim count is reduced until the total is at most cap.
std::vector<Vec> inducing_grid(const LatentPanel& lp, int per_dim, int cap = 64);

// One Euler-Maruyama step that also propagates dx/dtheta (one column per
// model parameter) through the update, reusing the same noise draw. x and
// dx_dtheta are updated in place.
void sensitivity_step(const NpsdeModel& model, Vec& x, Mat& dx_dtheta, double dt,
                      const Vec& noise);

// Monte-Carlo marginal log-likelihood plus log prior: paths start at each
// unit's first observation, are integrated through its observation times, and
// each later observation contributes log mean_s N(y | path_s, R). Noise
// streams are keyed by unit id, so unit order does not matter. Gaps longer
// than restart_factor * dt_sim restart the paths at the next observation
// (which then contributes no term).
double mc_loglik(const NpsdeModel& model, const LatentPanel& lp, int S, const RngStream& rng,
                 int workers = 1);

// Same value, plus the pathwise (sensitivity-equation) gradient under common
// random numbers.
double mc_loglik_grad(const NpsdeModel& model, const LatentPanel& lp, int S,
                      const RngStream& rng, Vec& grad, int workers = 1);

// Adam ascent on mc_loglik with fresh common random numbers per iteration.
// Throws DivergenceError (with the iteration index) if the objective turns
// NaN.
NpsdeModel fit(const LatentPanel& lp, const NpsdeConfig& cfg, const RngStream& rng,
               int workers = 1, FitLog* log = nullptr);

}  // namespace panelsde::npsde
