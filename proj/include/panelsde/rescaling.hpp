#pragma once

#include "panelsde/errors.hpp"

namespace panelsde {

// Maps observed time onto simulation time (t = alpha * t_obs) and fixes how
// finely each observation interval is sub-stepped for integration.
struct TimeRescaling {
    double alpha = 1.0;  // simulation time per observed time unit
    int n_sub = 1;       // sub-steps per observation interval

    void validate() const {
        if (!(alpha > 0.0)) throw InputError("time rescaling requires alpha > 0");
        if (n_sub < 1) throw InputError("time rescaling requires n_sub >= 1");
    }

    double to_sim(double t_obs) const { return alpha * t_obs; }
    double interval(double dt_obs) const { return alpha * dt_obs; }
    double substep(double dt_obs) const { return alpha * dt_obs / n_sub; }
};

}  // namespace panelsde
