#include <atomic>
#include <cmath>

#include "panelsde/errors.hpp"
#include "panelsde/npsde.hpp"

namespace panelsde::npsde {

NpsdeModel fit(const LatentPanel& lp, const NpsdeConfig& cfg, const RngStream& rng, int workers,
               FitLog* log) {
    if (cfg.iterations < 1) throw InputError("fit requires at least one iteration");
    NpsdeModel model = NpsdeModel::init_from_panel(lp, cfg);
    Vec theta = model.params();
    const int P = static_cast<int>(theta.size());

    const size_t n_trans = lp.n_transitions();
    const bool underparameterized = static_cast<size_t>(P) > n_trans;

    Vec m(P, 0.0), v(P, 0.0), grad(P, 0.0);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    std::vector<double> objectives;
    objectives.reserve(cfg.iterations);
    double grad_norm = 0.0;
    for (int it = 1; it <= cfg.iterations; ++it) {
        // Fresh common random numbers per iteration: value and gradient share
        // one noise realization.
        RngStream iter_rng = rng.derive(static_cast<uint64_t>(it));
        const double obj = mc_loglik_grad(model, lp, cfg.S, iter_rng, grad, workers);
        if (!std::isfinite(obj))
            throw DivergenceError("objective diverged at iteration " + std::to_string(it));
        objectives.push_back(obj);

        if (!cfg.fit_R)
            for (int l = 0; l < model.dim(); ++l) grad[P - model.dim() + l] = 0.0;

        const double c1 = 1.0 - std::pow(b1, it);
        const double c2 = 1.0 - std::pow(b2, it);
        grad_norm = 0.0;
        for (int p = 0; p < P; ++p) {
            grad_norm += grad[p] * grad[p];
            m[p] = b1 * m[p] + (1.0 - b1) * grad[p];
            v[p] = b2 * v[p] + (1.0 - b2) * grad[p] * grad[p];
            theta[p] += cfg.lr * (m[p] / c1) / (std::sqrt(v[p] / c2) + eps);
        }
        grad_norm = std::sqrt(grad_norm);
        model.set_params(theta);
    }

    if (log) {
        log->objectives = std::move(objectives);
        log->final_grad_norm = grad_norm;
        log->underparameterized = underparameterized;
        log->config = cfg;
    }
    return model;
}

}  // namespace panelsde::npsde
