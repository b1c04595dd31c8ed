#pragma once

#include <vector>

#include "panelsde/rng.hpp"
#include "panelsde/transition.hpp"

namespace panelsde {

// Weighted candidate population for one missing state, conditioned on both
// gap endpoints.
struct BridgeSample {
    double query_time = 0.0;
    std::vector<Vec> candidates;
    Vec weights;  // normalized, sum 1; computed before resampling
    std::vector<Vec> resampled;
    double ess = 0.0;        // 1 / sum(w^2), in [1, S]
    bool low_ess = false;    // ess fell below S/100

    Vec mean() const;  // of the resampled population
    Vec std() const;
};

// S forward Euler-Maruyama endpoints at time t started from (x0, t0), each
// segment integrated with n_sub sub-steps. Candidate s uses rng.derive(s).
std::vector<Vec> propose_forward(const SdeModel& model, const Vec& x0, double t0, double t,
                                 int S, int n_sub, RngStream& rng);

// Unnormalized log-weight of one candidate at time t against the endpoint
// (x_T, t_T): the transition log-density of candidate -> x_T over t_T - t.
double endpoint_logweight(const SdeModel& model, const Vec& candidate, const Vec& x_T, double t,
                          double t_T, const TransitionMethod& method);

// Max-shifted exponentiation and normalization of log-weights.
// Throws DegenerateWeightsError (reporting the max log-weight) when no finite
// weight survives.
Vec normalize_logweights(const Vec& logw);

double effective_sample_size(const Vec& weights);

// Systematic resampling with a single uniform offset. Uniform weights return
// the population unchanged.
std::vector<Vec> bridge_resample(const std::vector<Vec>& candidates, const Vec& weights,
                                 RngStream& rng);

// Bridge posterior at each query time in (t0, t_T), given both endpoints.
// Single query: propose forward, weight against the endpoint, resample.
// Multiple queries: sequential Monte Carlo; the resampled population is
// propagated to the next query time and reweighted with the endpoint density
// ratio against its parent, so every marginal targets the full bridge.
// ESS below S/100 sets low_ess on the sample; below 2 it throws
// DegenerateWeightsError.
std::vector<BridgeSample> impute_gap(const SdeModel& model, const Vec& x0, double t0,
                                     const Vec& x_T, double t_T,
                                     const std::vector<double>& query_times, int S, int n_sub,
                                     const TransitionMethod& method, RngStream& rng);

}  // namespace panelsde
