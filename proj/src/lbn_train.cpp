#include "panelsde/lbn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "panelsde/errors.hpp"

namespace panelsde::lbn {

KmDataset km_targets(const LatentPanel& lp) {
    KmDataset data;
    data.d = lp.dim();
    for (const auto& u : lp.units) {
        const int ui = static_cast<int>(data.unit_ids.size());
        data.unit_ids.push_back(u.id);
        for (size_t k = 0; k + 1 < u.states.size(); ++k) {
            const double t0 = u.times[k];
            const double t1 = u.times[k + 1];
            bool spans_gap = false;
            for (const auto& g : lp.gaps)
                if (g.unit == u.id && g.t_start == t0 && g.t_end == t1) {
                    spans_gap = true;
                    break;
                }
            if (spans_gap) {
                ++data.excluded_gap_transitions;
                continue;
            }
            const double dt = t1 - t0;
            const Vec dx = vec_sub(u.states[k + 1], u.states[k]);
            data.x.push_back(u.states[k]);
            data.y_f.push_back(vec_scale(dx, 1.0 / dt));
            data.y_d.push_back(mat_scale(vec_outer(dx, dx), 1.0 / (2.0 * dt)));
            data.dt.push_back(dt);
            data.unit_index.push_back(ui);
        }
    }
    if (data.x.empty()) throw InsufficientDataError("no usable transitions for moment targets");
    return data;
}

void SwagState::accumulate(const LbnParams& p) {
    if (n == 0) {
        mean = p;
        second = p;
        for (auto& v : second.drift) v *= v;
        for (auto& v : second.diff) v *= v;
        n = 1;
        return;
    }
    ++n;
    const double w = 1.0 / n;
    for (size_t i = 0; i < mean.drift.size(); ++i) {
        mean.drift[i] += (p.drift[i] - mean.drift[i]) * w;
        second.drift[i] += (p.drift[i] * p.drift[i] - second.drift[i]) * w;
    }
    for (size_t i = 0; i < mean.diff.size(); ++i) {
        mean.diff[i] += (p.diff[i] - mean.diff[i]) * w;
        second.diff[i] += (p.diff[i] * p.diff[i] - second.diff[i]) * w;
    }
}

LbnParams SwagState::sample(RngStream& rng) const {
    if (n == 0) throw InputError("cannot sample from an empty posterior state");
    LbnParams p = mean;
    for (size_t i = 0; i < p.drift.size(); ++i) {
        const double var = std::max(0.0, second.drift[i] - mean.drift[i] * mean.drift[i]);
        p.drift[i] += std::sqrt(var) * rng.normal();
    }
    for (size_t i = 0; i < p.diff.size(); ++i) {
        const double var = std::max(0.0, second.diff[i] - mean.diff[i] * mean.diff[i]);
        p.diff[i] += std::sqrt(var) * rng.normal();
    }
    return p;
}

double lbn_loss(const Mlp& drift_net, const Mlp& diff_net, const LbnParams& theta, const Vec& x,
                const Vec& y_f, const Mat& y_d) {
    const Vec f = drift_net.forward(x, theta.drift);
    double loss = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double e = f[i] - y_f[i];
        loss += 0.5 * e * e;
    }
    const PsdHead head = rectify_psd(diff_net.forward(x, theta.diff), y_d.rows());
    for (int i = 0; i < y_d.rows(); ++i)
        for (int j = 0; j < y_d.cols(); ++j) {
            const double e = head.value(i, j) - y_d(i, j);
            loss += 0.5 * e * e;
        }
    return loss;
}

void lbn_loss_grad(const Mlp& drift_net, const Mlp& diff_net, const LbnParams& theta,
                   const Vec& x, const Vec& y_f, const Mat& y_d, LbnParams& grad) {
    Mlp::Cache cache;
    const Vec f = drift_net.forward(x, theta.drift, cache);
    Vec df(f.size());
    for (size_t i = 0; i < f.size(); ++i) df[i] = f[i] - y_f[i];
    drift_net.backward(cache, theta.drift, df, grad.drift);

    Mlp::Cache dcache;
    const Vec raw = diff_net.forward(x, theta.diff, dcache);
    const PsdHead head = rectify_psd(raw, y_d.rows());
    Mat dD(y_d.rows(), y_d.cols());
    for (int i = 0; i < y_d.rows(); ++i)
        for (int j = 0; j < y_d.cols(); ++j) dD(i, j) = head.value(i, j) - y_d(i, j);
    const Vec d_raw = rectify_psd_backward(head, dD);
    diff_net.backward(dcache, theta.diff, d_raw, grad.diff);
}

namespace {

struct Adam {
    double lr;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    Vec m, v;
    long t = 0;

    explicit Adam(double lr_, size_t n) : lr(lr_), m(n, 0.0), v(n, 0.0) {}

    void step(Vec& theta, const Vec& grad) {
        ++t;
        const double c1 = 1.0 - std::pow(b1, t);
        const double c2 = 1.0 - std::pow(b2, t);
        for (size_t i = 0; i < theta.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

double mean_loss(const Mlp& drift_net, const Mlp& diff_net, const LbnParams& theta,
                 const KmDataset& data, const std::vector<int>& idx) {
    double total = 0.0;
    for (int i : idx) total += lbn_loss(drift_net, diff_net, theta, data.x[i], data.y_f[i],
                                        data.y_d[i]);
    return total / static_cast<double>(idx.size());
}

}  // namespace

FoldResult train_fold(const KmDataset& data, const std::vector<int>& val_units,
                      const LbnHyper& hyper, uint64_t seed) {
    const int d = data.d;
    Mlp drift_net(d, hyper.widths, d);
    Mlp diff_net(d, hyper.widths, tri_size(d));

    std::vector<int> train_idx, val_idx;
    for (size_t i = 0; i < data.size(); ++i) {
        const bool held_out = std::find(val_units.begin(), val_units.end(),
                                        data.unit_index[i]) != val_units.end();
        (held_out ? val_idx : train_idx).push_back(static_cast<int>(i));
    }
    if (train_idx.empty()) throw InsufficientDataError("training split is empty");
    const std::vector<int>& monitor_idx = val_idx.empty() ? train_idx : val_idx;

    RngStream init_rng(seed, 1);
    RngStream shuffle_rng(seed, 2);
    LbnParams theta{drift_net.init_params(init_rng), diff_net.init_params(init_rng)};

    Adam opt_f(hyper.lr, theta.drift.size());
    Adam opt_d(hyper.lr, theta.diff.size());

    FoldResult result;
    result.val_units = val_units;

    double best = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    bool collecting = false;
    LbnParams grad{Vec(theta.drift.size(), 0.0), Vec(theta.diff.size(), 0.0)};

    for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
        // Fisher-Yates with the stream's uniforms keeps shuffles reproducible.
        for (size_t i = train_idx.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(shuffle_rng.next_u64() % i);
            std::swap(train_idx[i - 1], train_idx[j]);
        }
        for (size_t start = 0; start < train_idx.size(); start += hyper.batch) {
            const size_t end = std::min(train_idx.size(), start + hyper.batch);
            std::fill(grad.drift.begin(), grad.drift.end(), 0.0);
            std::fill(grad.diff.begin(), grad.diff.end(), 0.0);
            for (size_t i = start; i < end; ++i) {
                const int s = train_idx[i];
                lbn_loss_grad(drift_net, diff_net, theta, data.x[s], data.y_f[s], data.y_d[s],
                              grad);
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto& g : grad.drift) g *= scale;
            for (auto& g : grad.diff) g *= scale;
            opt_f.step(theta.drift, grad.drift);
            opt_d.step(theta.diff, grad.diff);
        }

        const double monitor = mean_loss(drift_net, diff_net, theta, data, monitor_idx);
        if (!std::isfinite(monitor))
            throw DivergenceError("loss diverged at epoch " + std::to_string(epoch) +
                                  " (lr=" + std::to_string(hyper.lr) + ")");
        result.val_loss_history.push_back(monitor);
        result.epochs_run = epoch;
        result.final_val_loss = monitor;

        if (!collecting) {
            if (monitor < best * (1.0 - hyper.swa_tol)) {
                best = monitor;
                since_improvement = 0;
            } else {
                ++since_improvement;
            }
            if (since_improvement >= hyper.swa_window) {
                collecting = true;
                result.swa_start_epoch = epoch;
            }
        }
        if (collecting) {
            result.swag.accumulate(theta);
            if (result.swag.n >= hyper.swa_collect) break;
        }
    }

    if (result.swag.n == 0) {
        // Plateau never hit within the epoch budget; fall back to the final
        // parameters as a point posterior.
        result.swag.accumulate(theta);
        result.swa_start_epoch = result.epochs_run;
    }
    return result;
}

LbnEnsemble train_lbn(const KmDataset& data, const LbnHyper& hyper, uint64_t seed, int workers,
                      LbnTrainLog* log) {
    if (hyper.k_folds < 1) throw InputError("fold count must be >= 1");
    if (hyper.n_ens < 1 || hyper.n_ens % hyper.k_folds != 0)
        throw InputError("ensemble size must be a positive multiple of the fold count");
    const int n_units = static_cast<int>(data.unit_ids.size());
    if (hyper.k_folds > 1 && n_units < hyper.k_folds)
        throw InsufficientDataError("need at least " + std::to_string(hyper.k_folds) +
                                    " units for " + std::to_string(hyper.k_folds) + " folds");

    // Deterministic unit shuffle, then round-robin fold assignment.
    std::vector<int> unit_order(n_units);
    for (int i = 0; i < n_units; ++i) unit_order[i] = i;
    RngStream fold_rng(seed, 3);
    for (size_t i = unit_order.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(fold_rng.next_u64() % i);
        std::swap(unit_order[i - 1], unit_order[j]);
    }
    std::vector<std::vector<int>> fold_units(hyper.k_folds);
    if (hyper.k_folds > 1)
        for (int i = 0; i < n_units; ++i) fold_units[i % hyper.k_folds].push_back(unit_order[i]);

    std::vector<uint64_t> fold_seeds(hyper.k_folds);
    for (int f = 0; f < hyper.k_folds; ++f) fold_seeds[f] = RngStream(seed, 100 + f).next_u64();

    std::vector<FoldResult> folds(hyper.k_folds);
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, hyper.k_folds));

    std::exception_ptr first_error;
    std::mutex err_mu;
    auto run_fold = [&](int f) {
        try {
            folds[f] = train_fold(data, fold_units[f], hyper, fold_seeds[f]);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (workers == 1) {
        for (int f = 0; f < hyper.k_folds; ++f) run_fold(f);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int f = next++; f < hyper.k_folds; f = next++) run_fold(f);
            });
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    const int per_fold = hyper.n_ens / hyper.k_folds;
    std::vector<LbnParams> members;
    members.reserve(hyper.n_ens);
    for (int f = 0; f < hyper.k_folds; ++f) {
        RngStream sample_rng(fold_seeds[f], 4);
        for (int j = 0; j < per_fold; ++j) {
            RngStream member_rng = sample_rng.derive(static_cast<uint64_t>(j));
            members.push_back(folds[f].swag.sample(member_rng));
        }
    }

    if (log) {
        log->fold_seeds = fold_seeds;
        log->folds = folds;
        log->excluded_gap_transitions = data.excluded_gap_transitions;
        log->swa_rule = "plateau(window=" + std::to_string(hyper.swa_window) +
                        ", tol=" + std::to_string(hyper.swa_tol) +
                        ", collect=" + std::to_string(hyper.swa_collect) + ")";
    }
    return LbnEnsemble(Mlp(data.d, hyper.widths, data.d),
                       Mlp(data.d, hyper.widths, tri_size(data.d)), std::move(members));
}

}  // namespace panelsde::lbn
