#pragma once

#include <string>
#include <vector>

#include "panelsde/pca.hpp"
#include "panelsde/rng.hpp"
#include "panelsde/transition.hpp"

namespace panelsde {

// log p(x_from -> x_to) - log p(x_to -> x_from) over the same interval and
// method. Positive values mean the forward direction is the more likely one.
double local_irreversibility(const SdeModel& model, const Vec& x_from, const Vec& x_to,
                             double dt, const TransitionMethod& method);

struct PathIrreversibility {
    double Sigma = 0.0;          // sum of the series
    std::vector<double> series;  // one entry per transition
};

PathIrreversibility path_irreversibility(const SdeModel& model, const std::vector<Vec>& states,
                                         const std::vector<double>& times,
                                         const TransitionMethod& method);

// s = -log p(x_to | x_from): how unlikely the observed transition is.
double surprisal(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                 const TransitionMethod& method);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int S = 0;
};

// Conditional average of the surprisal over successors of x_from. For the
// one-step Gaussian method this is the differential entropy
// (d/2) ln(4 pi dt) + 1/2 ln det D + d/2 in closed form (std_error 0);
// otherwise a Monte-Carlo average over S >= 100 simulated successors.
McEstimate expected_surprisal(const SdeModel& model, const Vec& x_from, double dt,
                              const TransitionMethod& method, int S, RngStream& rng);

// s_tilde = s - E[s | x_from]; zero-mean over model-generated transitions.
double normalized_surprisal(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                            const TransitionMethod& method, int S, RngStream& rng);

// Fraction of S >= 1000 simulated successors at least as surprising as the
// observed one; uniform on [0,1] under the fitted model, near zero for
// anomalous transitions.
double tail_probability(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                        const TransitionMethod& method, int S, RngStream& rng);

struct AcfSeries {
    Vec acf;            // acf[k] at lag k, acf[0] = 1
    double band = 0.0;  // 1.96 / sqrt(n)
    int n = 0;          // pooled sample count
};

// ACF of standardized one-step residuals r = (2 D(x) dt)^(-1/2) (dx - F(x) dt),
// pooled per state dimension. Lag products never straddle unit boundaries.
// Throws InsufficientDataError with fewer than max_lag + 2 transitions.
std::vector<AcfSeries> residual_acf(const SdeModel& model, const LatentPanel& lp, int max_lag);

// Standard biased autocorrelation estimator of a single series.
// Throws DegenerateSeriesError for a constant series.
Vec series_acf(const std::vector<double>& series, int max_lag);

struct TransitionRecord {
    std::string unit;
    double t_from = 0.0;
    double t_to = 0.0;
    double sigma = 0.0;    // local irreversibility, nats
    double s = 0.0;        // surprisal, nats
    double s_tilde = 0.0;  // centered surprisal, nats
    double tail_prob = 0.0;
};

struct UnitIrreversibility {
    std::string unit;
    double Sigma = 0.0;
};

struct DiagnosticsReport {
    std::vector<TransitionRecord> records;     // ordered by (unit, t)
    std::vector<UnitIrreversibility> units;    // Sigma = sum of that unit's sigma
    TransitionMethod method;
    int S = 0;
    uint64_t seed = 0;
};

// Per-transition diagnostics over a whole panel. Successor batches are keyed
// by (seed, unit id, transition index), so results do not depend on worker
// count or scheduling.
DiagnosticsReport compute_diagnostics(const SdeModel& model, const LatentPanel& lp,
                                      const TransitionMethod& method, int S, uint64_t seed,
                                      int workers = 1);

}  // namespace panelsde
