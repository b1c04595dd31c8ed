#include "panelsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "panelsde/errors.hpp"
#include "panelsde/hash.hpp"
#include "panelsde/simulate.hpp"

namespace panelsde {

double local_irreversibility(const SdeModel& model, const Vec& x_from, const Vec& x_to,
                             double dt, const TransitionMethod& method) {
    return transition_logdensity(model, x_from, x_to, dt, method) -
           transition_logdensity(model, x_to, x_from, dt, method);
}

PathIrreversibility path_irreversibility(const SdeModel& model, const std::vector<Vec>& states,
                                         const std::vector<double>& times,
                                         const TransitionMethod& method) {
    if (states.size() < 2) throw InputError("path irreversibility requires at least 2 states");
    if (states.size() != times.size())
        throw ShapeError("path irreversibility: states/times length mismatch");
    PathIrreversibility out;
    out.series.reserve(states.size() - 1);
    for (size_t k = 0; k + 1 < states.size(); ++k) {
        const double sigma = local_irreversibility(model, states[k], states[k + 1],
                                                   times[k + 1] - times[k], method);
        out.series.push_back(sigma);
        out.Sigma += sigma;
    }
    return out;
}

double surprisal(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                 const TransitionMethod& method) {
    return -transition_logdensity(model, x_from, x_to, dt, method);
}

namespace {

std::vector<Vec> simulate_successors(const SdeModel& model, const Vec& x_from, double dt,
                                     int n_sub, int S, RngStream& rng) {
    std::vector<Vec> succ(S);
    const double h = dt / std::max(1, n_sub);
    for (int s = 0; s < S; ++s) {
        RngStream path_rng = rng.derive(static_cast<uint64_t>(s));
        Vec x = x_from;
        for (int k = 0; k < std::max(1, n_sub); ++k) x = em_step(model, x, h, path_rng);
        succ[s] = std::move(x);
    }
    return succ;
}

}  // namespace

McEstimate expected_surprisal(const SdeModel& model, const Vec& x_from, double dt,
                              const TransitionMethod& method, int S, RngStream& rng) {
    if (method.kind == TransitionMethod::Kind::OneStep) {
        const Mat D = model.diffusion(x_from);
        const int d = model.dim();
        const EigenSym eig = sym_eigendecompose(symmetrize(D), 1e-9);
        double logdet = 0.0;
        for (double v : eig.values) logdet += std::log(std::max(v, kEigenFloor));
        McEstimate e;
        e.value = 0.5 * d * std::log(4.0 * M_PI * dt) + 0.5 * logdet + 0.5 * d;
        e.S = 0;
        return e;
    }
    if (S < 100) throw InputError("Monte-Carlo expected surprisal requires S >= 100");
    const auto succ = simulate_successors(model, x_from, dt, method.n_sub, S, rng);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& y : succ) {
        const double s = surprisal(model, x_from, y, dt, method);
        sum += s;
        sumsq += s * s;
    }
    McEstimate e;
    e.S = S;
    e.value = sum / S;
    e.std_error = std::sqrt(std::max(0.0, sumsq / S - e.value * e.value) / S);
    return e;
}

double normalized_surprisal(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                            const TransitionMethod& method, int S, RngStream& rng) {
    return surprisal(model, x_from, x_to, dt, method) -
           expected_surprisal(model, x_from, dt, method, S, rng).value;
}

double tail_probability(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                        const TransitionMethod& method, int S, RngStream& rng) {
    if (S < 1000) throw InputError("tail probability requires S >= 1000");
    // s_tilde(successor) and s_tilde(observed) share the same conditional
    // expectation, so the comparison reduces to raw surprisals.
    const double s_obs = surprisal(model, x_from, x_to, dt, method);
    const auto succ = simulate_successors(model, x_from, dt, method.n_sub, S, rng);
    int count = 0;
    for (const auto& y : succ)
        if (surprisal(model, x_from, y, dt, method) >= s_obs) ++count;
    return static_cast<double>(count) / S;
}

std::vector<AcfSeries> residual_acf(const SdeModel& model, const LatentPanel& lp, int max_lag) {
    if (max_lag < 1) throw InputError("max_lag must be >= 1");
    const int d = lp.dim();
    // Per unit, the sequence of standardized residuals; lag products stay
    // within a unit.
    std::vector<std::vector<Vec>> segments;
    size_t n = 0;
    for (const auto& u : lp.units) {
        if (u.states.size() < 2) continue;
        std::vector<Vec> seg;
        for (size_t k = 0; k + 1 < u.states.size(); ++k) {
            const double dt = u.times[k + 1] - u.times[k];
            const Vec f = model.drift(u.states[k]);
            const Mat D = model.diffusion(u.states[k]);
            const Mat w = psd_inv_sqrt(mat_scale(D, 2.0 * dt));
            Vec dx = vec_sub(u.states[k + 1], u.states[k]);
            vec_axpy(dx, -dt, f);
            seg.push_back(mat_vec(w, dx));
        }
        n += seg.size();
        segments.push_back(std::move(seg));
    }
    if (n < static_cast<size_t>(max_lag) + 2)
        throw InsufficientDataError("need at least " + std::to_string(max_lag + 2) +
                                    " transitions for lag " + std::to_string(max_lag) +
                                    ", got " + std::to_string(n));

    std::vector<AcfSeries> out(d);
    for (int dim = 0; dim < d; ++dim) {
        double mean = 0.0;
        for (const auto& seg : segments)
            for (const auto& r : seg) mean += r[dim];
        mean /= static_cast<double>(n);

        double denom = 0.0;
        for (const auto& seg : segments)
            for (const auto& r : seg) {
                const double c = r[dim] - mean;
                denom += c * c;
            }
        if (denom == 0.0) throw DegenerateSeriesError("residuals constant in dimension " +
                                                      std::to_string(dim));
        AcfSeries s;
        s.n = static_cast<int>(n);
        s.band = 1.96 / std::sqrt(static_cast<double>(n));
        s.acf.assign(max_lag + 1, 0.0);
        s.acf[0] = 1.0;
        for (int lag = 1; lag <= max_lag; ++lag) {
            double num = 0.0;
            for (const auto& seg : segments)
                for (size_t t = 0; t + lag < seg.size(); ++t)
                    num += (seg[t][dim] - mean) * (seg[t + lag][dim] - mean);
            s.acf[lag] = num / denom;
        }
        out[dim] = std::move(s);
    }
    return out;
}

Vec series_acf(const std::vector<double>& series, int max_lag) {
    const size_t n = series.size();
    if (n < static_cast<size_t>(max_lag) + 2)
        throw InsufficientDataError("series too short for requested lag");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double v : series) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw DegenerateSeriesError("constant series has undefined ACF");
    Vec acf(max_lag + 1, 0.0);
    acf[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (size_t t = 0; t + lag < n; ++t) num += (series[t] - mean) * (series[t + lag] - mean);
        acf[lag] = num / denom;
    }
    return acf;
}

DiagnosticsReport compute_diagnostics(const SdeModel& model, const LatentPanel& lp,
                                      const TransitionMethod& method, int S, uint64_t seed,
                                      int workers) {
    if (S < 1000) throw InputError("diagnostics require S >= 1000 successor samples");
    DiagnosticsReport report;
    report.method = method;
    report.S = S;
    report.seed = seed;

    struct Task {
        size_t unit_index;
        size_t k;  // transition index within the unit
    };
    std::vector<Task> tasks;
    for (size_t ui = 0; ui < lp.units.size(); ++ui) {
        const auto& u = lp.units[ui];
        for (size_t k = 0; k + 1 < u.states.size(); ++k) tasks.push_back({ui, k});
    }
    report.records.resize(tasks.size());

    auto run_task = [&](size_t ti) {
        const auto& u = lp.units[tasks[ti].unit_index];
        const size_t k = tasks[ti].k;
        const double dt = u.times[k + 1] - u.times[k];
        const Vec& a = u.states[k];
        const Vec& b = u.states[k + 1];

        TransitionRecord rec;
        rec.unit = u.id;
        rec.t_from = u.times[k];
        rec.t_to = u.times[k + 1];
        rec.sigma = local_irreversibility(model, a, b, dt, method);
        rec.s = surprisal(model, a, b, dt, method);

        RngStream rng(seed, fnv1a64(u.id));
        RngStream trans_rng = rng.derive(k);
        const auto succ = simulate_successors(model, a, dt, method.n_sub, S, trans_rng);
        double esum = 0.0;
        int count = 0;
        for (const auto& y : succ) {
            const double s_sim = surprisal(model, a, y, dt, method);
            esum += s_sim;
            if (s_sim >= rec.s) ++count;
        }
        rec.s_tilde = rec.s - esum / S;
        rec.tail_prob = static_cast<double>(count) / S;
        report.records[ti] = std::move(rec);
    };

    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (workers <= 1 || tasks.size() < 2) {
        for (size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
    } else {
        std::exception_ptr first_error;
        std::mutex err_mu;
        std::vector<std::thread> pool;
        const size_t chunk = (tasks.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const size_t begin = w * chunk;
            const size_t end = std::min(tasks.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back([&, begin, end] {
                try {
                    for (size_t ti = begin; ti < end; ++ti) run_task(ti);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    for (const auto& u : lp.units) {
        if (u.states.size() < 2) continue;
        report.units.push_back({u.id, 0.0});
    }
    for (const auto& rec : report.records)
        for (auto& us : report.units)
            if (us.unit == rec.unit) {
                us.Sigma += rec.sigma;
                break;
            }
    return report;
}

}  // namespace panelsde
