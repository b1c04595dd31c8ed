#include <cmath>

#include "panelsde/errors.hpp"
#include "panelsde/lbn.hpp"

namespace panelsde::lbn {

LbnEnsemble::LbnEnsemble(Mlp drift_net, Mlp diff_net, std::vector<LbnParams> members)
    : drift_net_(std::move(drift_net)),
      diff_net_(std::move(diff_net)),
      members_(std::move(members)) {
    if (members_.empty()) throw InputError("ensemble needs at least one member");
    for (const auto& m : members_) {
        if (static_cast<int>(m.drift.size()) != drift_net_.param_count() ||
            static_cast<int>(m.diff.size()) != diff_net_.param_count())
            throw ShapeError("member parameter vector does not match the network shapes");
    }
}

Vec LbnEnsemble::drift(const Vec& x) const {
    Vec mean(dim(), 0.0);
    for (const auto& m : members_) vec_axpy(mean, 1.0, drift_net_.forward(x, m.drift));
    return vec_scale(mean, 1.0 / static_cast<double>(members_.size()));
}

Mat LbnEnsemble::diffusion(const Vec& x) const {
    Mat mean(dim(), dim());
    for (const auto& m : members_) {
        const PsdHead head = rectify_psd(diff_net_.forward(x, m.diff), dim());
        mean = mat_add(mean, head.value);
    }
    return mat_scale(mean, 1.0 / static_cast<double>(members_.size()));
}

EnsemblePrediction LbnEnsemble::predict(const Vec& x) const {
    const int d = dim();
    const double N = static_cast<double>(members_.size());
    EnsemblePrediction out;
    out.f_mean.assign(d, 0.0);
    out.f_std.assign(d, 0.0);
    out.d_mean = Mat(d, d);
    out.d_eigen_std.assign(d, 0.0);

    std::vector<Vec> fs(members_.size());
    std::vector<Vec> eigs(members_.size());
    for (size_t m = 0; m < members_.size(); ++m) {
        fs[m] = drift_net_.forward(x, members_[m].drift);
        vec_axpy(out.f_mean, 1.0 / N, fs[m]);
        const PsdHead head = rectify_psd(diff_net_.forward(x, members_[m].diff), d);
        out.d_mean = mat_add(out.d_mean, mat_scale(head.value, 1.0 / N));
        eigs[m] = sym_eigendecompose(head.value).values;
    }
    Vec eig_mean(d, 0.0);
    for (const auto& e : eigs) vec_axpy(eig_mean, 1.0 / N, e);
    for (size_t m = 0; m < members_.size(); ++m)
        for (int i = 0; i < d; ++i) {
            const double cf = fs[m][i] - out.f_mean[i];
            out.f_std[i] += cf * cf / N;
            const double ce = eigs[m][i] - eig_mean[i];
            out.d_eigen_std[i] += ce * ce / N;
        }
    for (int i = 0; i < d; ++i) {
        out.f_std[i] = std::sqrt(out.f_std[i]);
        out.d_eigen_std[i] = std::sqrt(out.d_eigen_std[i]);
    }
    return out;
}

EpistemicUncertainty LbnEnsemble::epistemic_uncertainty(const Vec& x) const {
    const double N = static_cast<double>(members_.size());
    double norm_mean = 0.0, norm_sq_mean = 0.0;
    std::vector<double> norms;
    norms.reserve(members_.size());
    for (const auto& m : members_) {
        const double n = vec_norm(drift_net_.forward(x, m.drift));
        norms.push_back(n);
        norm_mean += n / N;
        norm_sq_mean += n * n / N;
    }
    double var = 0.0;
    for (double n : norms) var += (n - norm_mean) * (n - norm_mean) / N;

    EpistemicUncertainty out;
    out.low_signal = norm_sq_mean < 1e-6;
    out.value = out.low_signal && norm_sq_mean == 0.0
                    ? 0.0
                    : std::sqrt(var) / std::sqrt(std::max(norm_sq_mean, 1e-300));
    return out;
}

}  // namespace panelsde::lbn
