#pragma once

#include <cstdint>
#include <vector>

#include "panelsde/sde_model.hpp"

namespace panelsde {

// How a transition density over an observation interval is approximated:
//  - OneStep: single Gaussian N(x + F dt, 2 D dt).
//  - Composed (default): propagate mean and covariance through n_sub
//    linearized sub-steps, then evaluate a Gaussian. Deterministic.
//  - Kde: simulate S forward endpoints and evaluate a product-Gaussian kernel
//    density with per-dimension Silverman bandwidth. Noise is keyed by `seed`
//    alone, so repeated evaluations (e.g. a forward/backward pair) share
//    random numbers.
struct TransitionMethod {
    enum class Kind { OneStep, Composed, Kde };
    Kind kind = Kind::Composed;
    int n_sub = 1;         // Composed and Kde sub-stepping
    int kde_samples = 0;   // Kde: S >= 100
    uint64_t seed = 0;     // Kde noise key

    static TransitionMethod one_step() { return {Kind::OneStep, 1, 0, 0}; }
    static TransitionMethod composed(int n_sub) { return {Kind::Composed, n_sub, 0, 0}; }
    static TransitionMethod kde(int S, uint64_t seed, int n_sub = 1) {
        return {Kind::Kde, n_sub, S, seed};
    }
};

// Central finite-difference Jacobian of the drift field at x.
Mat drift_jacobian(const SdeModel& model, const Vec& x);

// Gaussian moments of the composed transition: starting from (x_from, 0),
// m <- m + F(m) dt and C <- C + (J C + C J^T + 2 D(m)) dt over n_sub
// sub-steps. With n_sub = 1 this reduces to the one-step moments.
void composed_moments(const SdeModel& model, const Vec& x_from, double dt, int n_sub, Vec& mean,
                      Mat& cov);

// log p(x_to | x_from) over an interval dt > 0 under the chosen method.
// Throws DegenerateCovarianceError for unusable covariances and
// DegenerateKdeError when all simulated endpoints coincide.
double transition_logdensity(const SdeModel& model, const Vec& x_from, const Vec& x_to,
                             double dt, const TransitionMethod& method);

// Sum of transition log-densities along a recorded trajectory. The initial
// density is excluded: the result is conditional on states[0].
double path_logprob(const SdeModel& model, const std::vector<Vec>& states,
                    const std::vector<double>& times, const TransitionMethod& method);

}  // namespace panelsde
