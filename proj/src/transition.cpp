#include "panelsde/transition.hpp"

#include <algorithm>
#include <cmath>

#include "panelsde/errors.hpp"
#include "panelsde/gaussian.hpp"
#include "panelsde/rng.hpp"
#include "panelsde/simulate.hpp"

namespace panelsde {

Mat drift_jacobian(const SdeModel& model, const Vec& x) {
    const int d = model.dim();
    Mat J(d, d);
    Vec xp = x, xm = x;
    for (int j = 0; j < d; ++j) {
        const double h = 1e-5 * (1.0 + std::abs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        const Vec fp = model.drift(xp);
        const Vec fm = model.drift(xm);
        for (int i = 0; i < d; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return J;
}

void composed_moments(const SdeModel& model, const Vec& x_from, double dt, int n_sub, Vec& mean,
                      Mat& cov) {
    if (n_sub < 1) throw InputError("composed transition requires n_sub >= 1");
    const int d = model.dim();
    const double h = dt / n_sub;
    mean = x_from;
    cov = Mat(d, d);
    for (int s = 0; s < n_sub; ++s) {
        const Vec f = model.drift(mean);
        const Mat D = model.diffusion(mean);
        if (!vec_finite(f) || !mat_finite(D))
            throw ModelEvalError("non-finite drift or diffusion while composing moments");
        if (s > 0) {
            // First-order transport of the accumulated covariance through the
            // linearized flow; skipped on the first sub-step where C = 0.
            const Mat J = drift_jacobian(model, mean);
            const Mat JC = mat_mul(J, cov);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) cov(i, j) += (JC(i, j) + JC(j, i)) * h;
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) cov(i, j) += 2.0 * D(i, j) * h;
        vec_axpy(mean, h, f);
    }
    cov = symmetrize(cov);
}

namespace {

double kde_logdensity(const SdeModel& model, const Vec& x_from, const Vec& x_to, double dt,
                      const TransitionMethod& method) {
    if (method.kde_samples < 100) throw InputError("kernel density estimate requires S >= 100");
    const int d = model.dim();
    const int S = method.kde_samples;
    RngStream rng(method.seed, 0x6b6465);  // dedicated stream family for density noise

    std::vector<Vec> ends(S);
    for (int s = 0; s < S; ++s) {
        RngStream path_rng = rng.derive(static_cast<uint64_t>(s));
        Vec x = x_from;
        const double h = dt / method.n_sub;
        for (int k = 0; k < method.n_sub; ++k) x = em_step(model, x, h, path_rng);
        ends[s] = std::move(x);
    }

    Vec mean(d, 0.0), sd(d, 0.0);
    for (const auto& e : ends) vec_axpy(mean, 1.0 / S, e);
    for (const auto& e : ends)
        for (int i = 0; i < d; ++i) {
            const double c = e[i] - mean[i];
            sd[i] += c * c;
        }
    for (int i = 0; i < d; ++i) sd[i] = std::sqrt(sd[i] / (S - 1));
    if (*std::max_element(sd.begin(), sd.end()) == 0.0)
        throw DegenerateKdeError("all simulated endpoints are identical");

    Vec bw(d);
    const double factor = std::pow(4.0 / ((d + 2.0) * S), 1.0 / (d + 4.0));
    for (int i = 0; i < d; ++i) {
        bw[i] = sd[i] * factor;
        if (bw[i] == 0.0) throw DegenerateKdeError("zero bandwidth in dimension " +
                                                   std::to_string(i));
    }

    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(S);
    for (int s = 0; s < S; ++s) {
        terms[s] = gaussian_logpdf_diag(x_to, ends[s], bw);
        max_term = std::max(max_term, terms[s]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc / S);
}

}  // namespace

double transition_logdensity(const SdeModel& model, const Vec& x_from, const Vec& x_to,
                             double dt, const TransitionMethod& method) {
    if (!(dt > 0.0)) throw InputError("transition density requires dt > 0");
    if (static_cast<int>(x_from.size()) != model.dim() || x_from.size() != x_to.size())
        throw ShapeError("transition density: state dimension mismatch");

    switch (method.kind) {
        case TransitionMethod::Kind::OneStep: {
            const Vec f = model.drift(x_from);
            const Mat D = model.diffusion(x_from);
            if (!vec_finite(f) || !mat_finite(D))
                throw ModelEvalError("non-finite drift or diffusion");
            Vec mean = x_from;
            vec_axpy(mean, dt, f);
            return gaussian_logpdf(x_to, mean, mat_scale(D, 2.0 * dt));
        }
        case TransitionMethod::Kind::Composed: {
            Vec mean;
            Mat cov;
            composed_moments(model, x_from, dt, method.n_sub, mean, cov);
            return gaussian_logpdf(x_to, mean, cov);
        }
        case TransitionMethod::Kind::Kde:
            return kde_logdensity(model, x_from, x_to, dt, method);
    }
    throw InputError("unknown transition method");
}

double path_logprob(const SdeModel& model, const std::vector<Vec>& states,
                    const std::vector<double>& times, const TransitionMethod& method) {
    if (states.size() < 2) throw InputError("path log-probability requires at least 2 states");
    if (states.size() != times.size())
        throw ShapeError("path log-probability: states/times length mismatch");
    double total = 0.0;
    for (size_t k = 0; k + 1 < states.size(); ++k) {
        try {
            total += transition_logdensity(model, states[k], states[k + 1],
                                           times[k + 1] - times[k], method);
        } catch (const NumericalError& e) {
            throw NumericalError("segment " + std::to_string(k) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError("segment " + std::to_string(k) + ": " + e.what());
        }
    }
    return total;
}

}  // namespace panelsde
