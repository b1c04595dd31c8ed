#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "panelsde/errors.hpp"
#include "panelsde/hash.hpp"
#include "panelsde/npsde.hpp"

namespace panelsde::npsde {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

// Everything the propagator needs at one state: kernel vectors, interpolated
// fields, their state gradients, and their parameter derivatives.
struct NpsdeModel::Eval {
    Vec kxf, kxb;      // kernel vectors against Z
    Vec a_f, a_b;      // K^{-1} k_x, the interpolation weights
    Vec F;             // drift
    double b = 0.0;    // amplitude
    Mat J_f;           // dF/dx
    Vec g_b;           // db/dx
    Mat dF_hyper;      // (1+d) kernel hypers x d outputs
    Vec db_hyper;      // (1+d)
};

class PathPropagator {
public:
    PathPropagator(const NpsdeModel& m, bool with_sens) : m_(m), with_sens_(with_sens) {}

    int param_count() const { return m_.param_count(); }

    void evaluate(const Vec& x, NpsdeModel::Eval& e) const {
        const NpsdeModel& mm = m_;
        const int M = mm.m();
        const int d = mm.d_;
        e.kxf.resize(M);
        e.kxb.resize(M);
        for (int a = 0; a < M; ++a) {
            e.kxf[a] = mm.kf_.eval(x, mm.inducing_[a]);
            e.kxb[a] = mm.kb_.eval(x, mm.inducing_[a]);
        }
        e.F.assign(d, 0.0);
        for (int a = 0; a < M; ++a)
            for (int i = 0; i < d; ++i) e.F[i] += e.kxf[a] * mm.beta_f_(a, i);
        e.b = vec_dot(e.kxb, mm.beta_b_);
        if (!with_sens_) return;

        e.a_f = chol_solve(mm.chol_f_, e.kxf);
        e.a_b = chol_solve(mm.chol_b_, e.kxb);

        e.J_f = Mat(d, d);
        e.g_b.assign(d, 0.0);
        for (int l = 0; l < d; ++l) {
            const double ellf2 = mm.kf_.length(l) * mm.kf_.length(l);
            const double ellb2 = mm.kb_.length(l) * mm.kb_.length(l);
            for (int a = 0; a < M; ++a) {
                const double dzf = -(x[l] - mm.inducing_[a][l]) / ellf2;
                const double dzb = -(x[l] - mm.inducing_[a][l]) / ellb2;
                for (int i = 0; i < d; ++i) e.J_f(i, l) += e.kxf[a] * dzf * mm.beta_f_(a, i);
                e.g_b[l] += e.kxb[a] * dzb * mm.beta_b_[a];
            }
        }

        // Hyper derivatives: dF/dh = (dk_x/dh)^T beta - a_f^T (dK/dh) beta,
        // the second factor precomputed per parameter refresh.
        e.dF_hyper = Mat(1 + d, d);
        e.db_hyper.assign(1 + d, 0.0);
        for (int h = 0; h <= d; ++h) {
            for (int a = 0; a < M; ++a) {
                double wf, wb;
                if (h == 0) {
                    wf = e.kxf[a];
                    wb = e.kxb[a];
                } else {
                    const int l = h - 1;
                    const double dz = x[l] - mm.inducing_[a][l];
                    wf = e.kxf[a] * dz * dz / (mm.kf_.length(l) * mm.kf_.length(l));
                    wb = e.kxb[a] * dz * dz / (mm.kb_.length(l) * mm.kb_.length(l));
                }
                for (int i = 0; i < d; ++i) {
                    e.dF_hyper(h, i) += wf * mm.beta_f_(a, i) - e.a_f[a] * mm.dk_beta_f_[h](a, i);
                }
                e.db_hyper[h] += wb * mm.beta_b_[a] - e.a_b[a] * mm.dk_beta_b_[h][a];
            }
        }
    }

    // One Euler-Maruyama update of x (and of dx/dtheta when tracking
    // sensitivities), sharing the same noise draw.
    void step(Vec& x, Mat* Sx, double dt, const Vec& noise) const {
        const int d = m_.d_;
        const int M = m_.m();
        NpsdeModel::Eval e;
        evaluate(x, e);
        if (!vec_finite(e.F) || !std::isfinite(e.b))
            throw ModelEvalError("non-finite drift or amplitude");
        const double sdt = std::sqrt(dt);

        if (Sx) {
            const int P = param_count();
            if (Sx->rows() != d || Sx->cols() != P)
                throw ShapeError("sensitivity matrix has wrong shape");
            // r[p] = (db/dx . Sx[:,p]) + db/dtheta_p
            Vec r(P, 0.0);
            for (int l = 0; l < d; ++l) {
                const double g = e.g_b[l];
                if (g == 0.0) continue;
                for (int p = 0; p < P; ++p) r[p] += g * (*Sx)(l, p);
            }
            const int off_ub = M * d;
            const int off_kf = off_ub + M;
            const int off_kb = off_kf + 1 + d;
            for (int a = 0; a < M; ++a) r[off_ub + a] += e.a_b[a];
            for (int h = 0; h <= d; ++h) r[off_kb + h] += e.db_hyper[h];

            Mat next(d, P);
            for (int i = 0; i < d; ++i) {
                for (int p = 0; p < P; ++p) {
                    double js = 0.0;
                    for (int l = 0; l < d; ++l) js += e.J_f(i, l) * (*Sx)(l, p);
                    next(i, p) = (*Sx)(i, p) + dt * js + sdt * noise[i] * r[p];
                }
                for (int a = 0; a < M; ++a) next(i, a * d + i) += dt * e.a_f[a];
                for (int h = 0; h <= d; ++h) next(i, off_kf + h) += dt * e.dF_hyper(h, i);
            }
            *Sx = std::move(next);
        }

        for (int i = 0; i < d; ++i) x[i] += e.F[i] * dt + e.b * sdt * noise[i];
    }

private:
    const NpsdeModel& m_;
    bool with_sens_;
};

void sensitivity_step(const NpsdeModel& model, Vec& x, Mat& dx_dtheta, double dt,
                      const Vec& noise) {
    if (!(dt > 0.0)) throw InputError("sensitivity step requires dt > 0");
    PathPropagator prop(model, true);
    prop.step(x, &dx_dtheta, dt, noise);
}

namespace {

struct UnitResult {
    double loglik = 0.0;
    Vec grad;
};

UnitResult eval_unit(const NpsdeModel& model, const LatentUnit& u, int S,
                     const RngStream& key, bool with_grad) {
    const int d = model.dim();
    const int P = model.param_count();
    UnitResult out;
    if (with_grad) out.grad.assign(P, 0.0);
    if (u.states.size() < 2) return out;

    PathPropagator prop(model, with_grad);
    const Vec r = model.r_diag();
    const double max_gap = model.restart_factor() * model.dt_sim();

    std::vector<Vec> x(S, u.states[0]);
    std::vector<Mat> Sx;
    if (with_grad) Sx.assign(S, Mat(d, P));
    std::vector<RngStream> path_rng;
    path_rng.reserve(S);
    RngStream base(key.master_seed(), key.stream_id() ^ fnv1a64(u.id));
    for (int s = 0; s < S; ++s) path_rng.push_back(base.derive(static_cast<uint64_t>(s)));

    Vec noise(d), logw(S), dlw;
    for (size_t k = 1; k < u.states.size(); ++k) {
        const double gap = u.times[k] - u.times[k - 1];
        if (gap > max_gap) {
            // Segment break: restart every path at the observation and drop
            // its accumulated parameter dependence.
            for (int s = 0; s < S; ++s) {
                x[s] = u.states[k];
                if (with_grad) Sx[s] = Mat(d, P);
            }
            continue;
        }
        const long n_steps = std::max<long>(1, std::llround(gap / model.dt_sim()));
        const double h = gap / static_cast<double>(n_steps);
        for (int s = 0; s < S; ++s) {
            for (long st = 0; st < n_steps; ++st) {
                for (int i = 0; i < d; ++i) noise[i] = path_rng[s].normal();
                prop.step(x[s], with_grad ? &Sx[s] : nullptr, h, noise);
            }
        }

        const Vec& y = u.states[k];
        double max_lw = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < S; ++s) {
            double lw = 0.0;
            for (int l = 0; l < d; ++l) {
                const double resid = y[l] - x[s][l];
                lw += -0.5 * (kLog2Pi + model.log_r()[l] + resid * resid / r[l]);
            }
            logw[s] = lw;
            max_lw = std::max(max_lw, lw);
        }
        double sum = 0.0;
        for (int s = 0; s < S; ++s) sum += std::exp(logw[s] - max_lw);
        out.loglik += max_lw + std::log(sum) - std::log(static_cast<double>(S));

        if (with_grad) {
            const int off_r = P - d;
            for (int s = 0; s < S; ++s) {
                const double w = std::exp(logw[s] - max_lw) / sum;
                if (w == 0.0) continue;
                for (int l = 0; l < d; ++l) {
                    const double resid = y[l] - x[s][l];
                    const double pull = resid / r[l];
                    for (int p = 0; p < P; ++p) out.grad[p] += w * pull * Sx[s](l, p);
                    out.grad[off_r + l] += w * 0.5 * (resid * resid / r[l] - 1.0);
                }
            }
        }
    }
    return out;
}

double loglik_impl(const NpsdeModel& model, const LatentPanel& lp, int S, const RngStream& rng,
                   Vec* grad, int workers) {
    if (S < 2) throw InputError("Monte-Carlo likelihood requires S >= 2");
    const bool with_grad = grad != nullptr;
    const int P = model.param_count();

    std::vector<UnitResult> partial(lp.units.size());
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(lp.units.size())));

    auto run_unit = [&](size_t ui) {
        partial[ui] = eval_unit(model, lp.units[ui], S, rng, with_grad);
    };
    if (workers <= 1) {
        for (size_t ui = 0; ui < lp.units.size(); ++ui) run_unit(ui);
    } else {
        std::exception_ptr first_error;
        std::mutex err_mu;
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                try {
                    for (size_t ui = next++; ui < lp.units.size(); ui = next++) run_unit(ui);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // Reduction in fixed unit order keeps the result scheduling-independent.
    double total = model.log_prior();
    if (with_grad) {
        grad->assign(P, 0.0);
        model.log_prior_grad(*grad);
    }
    for (const auto& part : partial) {
        total += part.loglik;
        if (with_grad)
            for (int p = 0; p < P; ++p) (*grad)[p] += part.grad[p];
    }
    return total;
}

}  // namespace

double mc_loglik(const NpsdeModel& model, const LatentPanel& lp, int S, const RngStream& rng,
                 int workers) {
    return loglik_impl(model, lp, S, rng, nullptr, workers);
}

double mc_loglik_grad(const NpsdeModel& model, const LatentPanel& lp, int S,
                      const RngStream& rng, Vec& grad, int workers) {
    return loglik_impl(model, lp, S, rng, &grad, workers);
}

}  // namespace panelsde::npsde
