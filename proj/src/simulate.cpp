#include "panelsde/simulate.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "panelsde/errors.hpp"

namespace panelsde {

LinearSde LinearSde::ou(int d, double theta, double diff) {
    return LinearSde(mat_scale(Mat::identity(d), -theta), Vec(d, 0.0),
                     mat_scale(Mat::identity(d), diff));
}

LinearSde LinearSde::brownian(int d, double diff) { return ou(d, 0.0, diff); }

Vec LinearSde::drift(const Vec& x) const {
    Vec f = mat_vec(A_, x);
    for (size_t i = 0; i < f.size(); ++i) f[i] += c_[i];
    return f;
}

namespace {

std::string format_state(const Vec& x) {
    std::ostringstream ss;
    ss << '(';
    for (size_t i = 0; i < x.size(); ++i) ss << (i ? "," : "") << x[i];
    ss << ')';
    return ss.str();
}

}  // namespace

Vec em_step(const SdeModel& model, const Vec& x, double dt, const Vec& noise) {
    if (!(dt > 0.0)) throw InputError("em_step requires dt > 0");
    const Vec f = model.drift(x);
    const Mat d = model.diffusion(x);
    if (!vec_finite(f) || !mat_finite(d))
        throw ModelEvalError("non-finite drift or diffusion at x=" + format_state(x));
    const Mat b = psd_sqrt(mat_scale(d, 2.0));
    Vec next = x;
    const double sdt = std::sqrt(dt);
    for (int i = 0; i < model.dim(); ++i) {
        double diff = 0.0;
        for (int j = 0; j < model.dim(); ++j) diff += b(i, j) * noise[j];
        next[i] += f[i] * dt + sdt * diff;
    }
    return next;
}

Vec em_step(const SdeModel& model, const Vec& x, double dt, RngStream& rng) {
    Vec noise(model.dim());
    for (auto& n : noise) n = rng.normal();
    return em_step(model, x, dt, noise);
}

namespace {

Vec integrate_interval(const SdeModel& model, Vec x, double dt_total, int n_sub, RngStream& rng,
                       size_t interval_index) {
    const double dt = dt_total / n_sub;
    for (int s = 0; s < n_sub; ++s) {
        try {
            x = em_step(model, x, dt, rng);
        } catch (const ModelEvalError& e) {
            throw ModelEvalError(std::string(e.what()) + " (interval " +
                                 std::to_string(interval_index) + ", sub-step " +
                                 std::to_string(s) + ")");
        }
    }
    return x;
}

}  // namespace

Path simulate_path_at(const SdeModel& model, const Vec& x0, const std::vector<double>& times,
                      int n_sub, RngStream& rng) {
    if (n_sub < 1) throw InputError("n_sub must be >= 1");
    Path path;
    path.times.reserve(times.size() + 1);
    path.states.reserve(times.size() + 1);
    path.times.push_back(0.0);
    path.states.push_back(x0);
    double t_prev = 0.0;
    for (size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] > t_prev))
            throw InputError("observation times must be strictly increasing and positive");
        path.states.push_back(
            integrate_interval(model, path.states.back(), times[k] - t_prev, n_sub, rng, k));
        path.times.push_back(times[k]);
        t_prev = times[k];
    }
    return path;
}

Path simulate_path(const SdeModel& model, const Vec& x0, double horizon,
                   const TimeRescaling& rescaling, RngStream& rng) {
    if (!(horizon > 0.0)) throw InputError("horizon must be > 0");
    rescaling.validate();
    const long n_steps = std::max<long>(1, std::llround(horizon));
    std::vector<double> times(n_steps);
    for (long i = 0; i < n_steps; ++i) times[i] = rescaling.alpha * (i + 1);
    return simulate_path_at(model, x0, times, rescaling.n_sub, rng);
}

Vec PathEnsemble::mean_at(size_t time_index) const {
    Vec m(start.size(), 0.0);
    for (const auto& p : paths) vec_axpy(m, 1.0, p[time_index]);
    return vec_scale(m, 1.0 / static_cast<double>(paths.size()));
}

Vec PathEnsemble::variance_at(size_t time_index) const {
    const Vec m = mean_at(time_index);
    Vec v(start.size(), 0.0);
    for (const auto& p : paths)
        for (size_t i = 0; i < m.size(); ++i) {
            const double c = p[time_index][i] - m[i];
            v[i] += c * c;
        }
    const double denom = paths.size() > 1 ? static_cast<double>(paths.size() - 1) : 1.0;
    return vec_scale(v, 1.0 / denom);
}

PathEnsemble simulate_ensemble(const SdeModel& model, const Vec& x0,
                               const std::vector<double>& times, int S, int n_sub,
                               const RngStream& rng, int workers) {
    if (S < 1) throw InputError("ensemble size must be >= 1");
    PathEnsemble ens;
    ens.start = x0;
    ens.times.push_back(0.0);
    ens.times.insert(ens.times.end(), times.begin(), times.end());
    ens.paths.resize(S);
    ens.master_seed = rng.master_seed();
    ens.base_stream = rng.stream_id();

    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, S));

    std::exception_ptr first_error;
    std::mutex err_mu;
    auto run_range = [&](int begin, int end) {
        for (int s = begin; s < end; ++s) {
            try {
                RngStream path_rng = rng.derive(static_cast<uint64_t>(s));
                ens.paths[s] = simulate_path_at(model, x0, times, n_sub, path_rng).states;
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers == 1) {
        run_range(0, S);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (S + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int begin = w * chunk;
            const int end = std::min(S, begin + chunk);
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return ens;
}

}  // namespace panelsde
