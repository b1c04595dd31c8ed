#include "panelsde/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "panelsde/errors.hpp"
#include "panelsde/simulate.hpp"

namespace panelsde {

Vec BridgeSample::mean() const {
    Vec m(resampled.empty() ? 0 : resampled[0].size(), 0.0);
    for (const auto& x : resampled) vec_axpy(m, 1.0, x);
    return vec_scale(m, 1.0 / static_cast<double>(resampled.size()));
}

Vec BridgeSample::std() const {
    const Vec m = mean();
    Vec v(m.size(), 0.0);
    for (const auto& x : resampled)
        for (size_t i = 0; i < m.size(); ++i) {
            const double c = x[i] - m[i];
            v[i] += c * c;
        }
    const double denom = resampled.size() > 1 ? static_cast<double>(resampled.size() - 1) : 1.0;
    for (auto& s : v) s = std::sqrt(s / denom);
    return v;
}

std::vector<Vec> propose_forward(const SdeModel& model, const Vec& x0, double t0, double t,
                                 int S, int n_sub, RngStream& rng) {
    if (!(t0 < t)) throw InputError("forward proposal requires t0 < t");
    if (S < 1) throw InputError("candidate count must be >= 1");
    if (n_sub < 1) throw InputError("n_sub must be >= 1");
    const double dt = (t - t0) / n_sub;
    std::vector<Vec> out(S);
    for (int s = 0; s < S; ++s) {
        RngStream path_rng = rng.derive(static_cast<uint64_t>(s));
        Vec x = x0;
        for (int k = 0; k < n_sub; ++k) x = em_step(model, x, dt, path_rng);
        out[s] = std::move(x);
    }
    return out;
}

double endpoint_logweight(const SdeModel& model, const Vec& candidate, const Vec& x_T, double t,
                          double t_T, const TransitionMethod& method) {
    if (!(t < t_T)) throw InputError("endpoint weight requires t < t_T");
    return transition_logdensity(model, candidate, x_T, t_T - t, method);
}

Vec normalize_logweights(const Vec& logw) {
    double max_lw = -std::numeric_limits<double>::infinity();
    for (double lw : logw)
        if (std::isfinite(lw)) max_lw = std::max(max_lw, lw);
    if (!std::isfinite(max_lw))
        throw DegenerateWeightsError("no finite log-weight (max = " +
                                     std::to_string(logw.empty() ? 0.0 : logw[0]) + ")");
    Vec w(logw.size());
    double sum = 0.0;
    for (size_t i = 0; i < logw.size(); ++i) {
        w[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - max_lw) : 0.0;
        sum += w[i];
    }
    if (!(sum > 0.0))
        throw DegenerateWeightsError("all weights vanish after normalization (max log-weight " +
                                     std::to_string(max_lw) + ")");
    for (auto& v : w) v /= sum;
    return w;
}

double effective_sample_size(const Vec& weights) {
    double s2 = 0.0;
    for (double w : weights) s2 += w * w;
    return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

std::vector<Vec> bridge_resample(const std::vector<Vec>& candidates, const Vec& weights,
                                 RngStream& rng) {
    const size_t S = candidates.size();
    if (weights.size() != S) throw ShapeError("resampling: weights/candidates length mismatch");
    const double u = rng.uniform();  // in (0, 1]
    std::vector<Vec> out;
    out.reserve(S);
    double cum = 0.0;
    size_t j = 0;
    for (size_t k = 0; k < S; ++k) {
        const double p = (static_cast<double>(k) + u) / static_cast<double>(S);
        while (j + 1 < S && cum + weights[j] < p) cum += weights[j++];
        out.push_back(candidates[j]);
    }
    return out;
}

std::vector<BridgeSample> impute_gap(const SdeModel& model, const Vec& x0, double t0,
                                     const Vec& x_T, double t_T,
                                     const std::vector<double>& query_times, int S, int n_sub,
                                     const TransitionMethod& method, RngStream& rng) {
    std::vector<BridgeSample> out;
    if (query_times.empty()) return out;
    double prev = t0;
    for (double q : query_times) {
        if (!(q > prev) || !(q < t_T))
            throw InputError("query times must be strictly increasing inside (t0, t_T)");
        prev = q;
    }
    if (S < 2) throw InputError("bridge sampling requires S >= 2");

    RngStream propagate_rng = rng.derive(0x70726f70);
    RngStream resample_rng = rng.derive(0x72657361);

    std::vector<Vec> pop = propose_forward(model, x0, t0, query_times[0], S, n_sub,
                                           propagate_rng);
    // Endpoint factor already absorbed into each particle's history; zero
    // before the first weighting.
    Vec parent_logw(S, 0.0);

    for (size_t qi = 0; qi < query_times.size(); ++qi) {
        const double q = query_times[qi];
        Vec logw(S);
        for (int s = 0; s < S; ++s)
            logw[s] = endpoint_logweight(model, pop[s], x_T, q, t_T, method) - parent_logw[s];

        BridgeSample bs;
        bs.query_time = q;
        bs.weights = normalize_logweights(logw);
        bs.ess = effective_sample_size(bs.weights);
        if (bs.ess < 2.0)
            throw DegenerateWeightsError("bridge degenerated at t=" + std::to_string(q) +
                                         " (ESS=" + std::to_string(bs.ess) + ")");
        bs.low_ess = bs.ess < static_cast<double>(S) / 100.0;
        bs.candidates = pop;
        bs.resampled = bridge_resample(pop, bs.weights, resample_rng);

        if (qi + 1 < query_times.size()) {
            const double q_next = query_times[qi + 1];
            const double dt = (q_next - q) / n_sub;
            std::vector<Vec> next(S);
            for (int s = 0; s < S; ++s) {
                parent_logw[s] = endpoint_logweight(model, bs.resampled[s], x_T, q, t_T, method);
                RngStream path_rng = propagate_rng.derive((qi + 1) * static_cast<uint64_t>(S) + s);
                Vec x = bs.resampled[s];
                for (int k = 0; k < n_sub; ++k) x = em_step(model, x, dt, path_rng);
                next[s] = std::move(x);
            }
            pop = std::move(next);
        }
        out.push_back(std::move(bs));
    }
    return out;
}

}  // namespace panelsde
