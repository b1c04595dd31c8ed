#pragma once

#include <vector>

#include "panelsde/rescaling.hpp"
#include "panelsde/rng.hpp"
#include "panelsde/sde_model.hpp"

namespace panelsde {

// One Euler-Maruyama update: x + F(x) dt + sqrt(2 D(x)) (sqrt(dt) noise).
// noise holds d standard normals. Throws ModelEvalError (carrying x) when the
// model returns non-finite output.
Vec em_step(const SdeModel& model, const Vec& x, double dt, const Vec& noise);

// Drives em_step with noise drawn from rng; dt > 0 required.
Vec em_step(const SdeModel& model, const Vec& x, double dt, RngStream& rng);

struct Path {
    std::vector<double> times;  // observation-grid times, times[0] = 0
    std::vector<Vec> states;    // states[0] = x0
};

// Integrates from x0 over [0, horizon] on the observation grid implied by the
// rescaling: the horizon is split into intervals of length rescaling.alpha,
// each integrated with n_sub sub-steps; only grid states are recorded.
Path simulate_path(const SdeModel& model, const Vec& x0, double horizon,
                   const TimeRescaling& rescaling, RngStream& rng);

// As above but recording states at the given (strictly increasing, positive)
// times; each inter-observation interval is integrated with n_sub sub-steps.
Path simulate_path_at(const SdeModel& model, const Vec& x0, const std::vector<double>& times,
                      int n_sub, RngStream& rng);

struct PathEnsemble {
    Vec start;
    std::vector<double> times;
    std::vector<std::vector<Vec>> paths;  // [S][len(times)]
    uint64_t master_seed = 0;
    uint64_t base_stream = 0;

    int size() const { return static_cast<int>(paths.size()); }
    Vec mean_at(size_t time_index) const;
    Vec variance_at(size_t time_index) const;  // per-dimension, S-1 denominator
};

// S independent paths, one derived RngStream per path index so the result is
// identical regardless of worker count or scheduling. workers <= 0 means one
// thread per hardware core.
PathEnsemble simulate_ensemble(const SdeModel& model, const Vec& x0,
                               const std::vector<double>& times, int S, int n_sub,
                               const RngStream& rng, int workers = 1);

}  // namespace panelsde
