#include "panelsde/pca.hpp"

#include <algorithm>
#include <cmath>

#include "panelsde/errors.hpp"

namespace panelsde {

size_t LatentPanel::n_states() const {
    size_t n = 0;
    for (const auto& u : units) n += u.states.size();
    return n;
}

size_t LatentPanel::n_transitions() const {
    size_t n = 0;
    for (const auto& u : units)
        if (u.states.size() > 1) n += u.states.size() - 1;
    return n;
}

Vec PcaModel::standardize(const Vec& raw) const {
    Vec z(raw.size());
    for (size_t j = 0; j < raw.size(); ++j) {
        double v = raw[j];
        if (std::find(log_columns.begin(), log_columns.end(), static_cast<int>(j)) !=
            log_columns.end()) {
            if (!(v > 0.0))
                throw InputError("log-transformed column '" + columns[j] +
                                 "' has non-positive value " + std::to_string(v));
            v = std::log10(v);
        }
        z[j] = (v - column_means[j]) / column_stds[j];
    }
    return z;
}

Vec PcaModel::project_row(const Vec& z) const {
    Vec x(d());
    for (int i = 0; i < k(); ++i) {
        double s = 0.0;
        for (int j = 0; j < p(); ++j) s += components(i, j) * z[j];
        x[i] = s;
    }
    for (size_t c = 0; c < passthrough.size(); ++c) x[k() + c] = z[passthrough[c]];
    return x;
}

PcaModel pca_fit(const Panel& panel, int k, const std::vector<int>& log_columns,
                 const std::vector<int>& anchors, const std::vector<int>& passthrough) {
    const int p = panel.p();
    if (k < 1 || k > p) throw InputError("component count must be in [1, p]");
    if (!anchors.empty() && static_cast<int>(anchors.size()) != k)
        throw InputError("anchor list must have one entry per component");
    for (int c : passthrough)
        if (c < 0 || c >= p) throw InputError("pass-through column index out of range");
    for (int c : log_columns)
        if (c < 0 || c >= p) throw InputError("log column index out of range");

    PcaModel m;
    m.columns = panel.columns;
    m.log_columns = log_columns;
    m.passthrough = passthrough;

    // Complete-case rows, log-transformed.
    std::vector<Vec> rows;
    for (const auto& u : panel.units) {
        for (const auto& o : u.obs) {
            bool complete = true;
            for (double v : o.values)
                if (is_missing(v)) {
                    complete = false;
                    break;
                }
            if (!complete) continue;
            Vec r = o.values;
            for (int c : log_columns) {
                if (!(r[c] > 0.0))
                    throw InputError("log-transformed column '" + panel.columns[c] +
                                     "' has non-positive value " + std::to_string(r[c]));
                r[c] = std::log10(r[c]);
            }
            rows.push_back(std::move(r));
        }
    }
    const int n = static_cast<int>(rows.size());
    if (n < p + 1)
        throw InsufficientDataError("need at least " + std::to_string(p + 1) +
                                    " complete rows to fit, got " + std::to_string(n));

    m.column_means.assign(p, 0.0);
    for (const auto& r : rows)
        for (int j = 0; j < p; ++j) m.column_means[j] += r[j];
    for (int j = 0; j < p; ++j) m.column_means[j] /= n;

    m.column_stds.assign(p, 0.0);
    for (const auto& r : rows)
        for (int j = 0; j < p; ++j) {
            const double c = r[j] - m.column_means[j];
            m.column_stds[j] += c * c;
        }
    for (int j = 0; j < p; ++j) {
        m.column_stds[j] = std::sqrt(m.column_stds[j] / (n - 1));
        if (!(m.column_stds[j] > 0.0))
            throw DegenerateColumnError("column '" + panel.columns[j] + "' has zero variance");
    }

    Mat corr(p, p);
    for (const auto& r : rows) {
        Vec z(p);
        for (int j = 0; j < p; ++j) z[j] = (r[j] - m.column_means[j]) / m.column_stds[j];
        for (int i = 0; i < p; ++i)
            for (int j = i; j < p; ++j) corr(i, j) += z[i] * z[j];
    }
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) {
            corr(i, j) /= (n - 1);
            corr(j, i) = corr(i, j);
        }

    const EigenSym eig = sym_eigendecompose(corr);
    m.components = Mat(k, p);
    m.explained_variance_ratio.resize(k);
    m.sign_anchors.resize(k);
    for (int i = 0; i < k; ++i) {
        m.explained_variance_ratio[i] = std::max(eig.values[i], 0.0) / p;
        int anchor;
        if (anchors.empty()) {
            anchor = 0;
            for (int j = 1; j < p; ++j)
                if (std::abs(eig.vectors(j, i)) > std::abs(eig.vectors(anchor, i))) anchor = j;
        } else {
            anchor = anchors[i];
            if (anchor < 0 || anchor >= p) throw InputError("anchor column index out of range");
        }
        m.sign_anchors[i] = anchor;
        const double flip = eig.vectors(anchor, i) < 0.0 ? -1.0 : 1.0;
        for (int j = 0; j < p; ++j) m.components(i, j) = flip * eig.vectors(j, i);
    }
    return m;
}

LatentPanel pca_project(const PcaModel& model, const Panel& panel) {
    if (panel.columns != model.columns)
        throw SchemaError("panel columns do not match the fitted transform");

    LatentPanel lp;
    for (int i = 0; i < model.k(); ++i) lp.state_names.push_back("pc" + std::to_string(i + 1));
    for (int c : model.passthrough) lp.state_names.push_back(model.columns[c] + "_std");

    for (const auto& u : panel.units) {
        LatentUnit lu;
        lu.id = u.id;
        GapSpan* open_gap = nullptr;
        for (const auto& o : u.obs) {
            bool complete = true;
            for (double v : o.values)
                if (is_missing(v)) {
                    complete = false;
                    break;
                }
            if (complete) {
                lu.times.push_back(o.t_obs);
                lu.states.push_back(model.project_row(model.standardize(o.values)));
                if (open_gap) {
                    open_gap->t_end = o.t_obs;
                    open_gap = nullptr;
                }
            } else {
                if (!open_gap) {
                    lp.gaps.push_back(GapSpan{u.id,
                                              lu.times.empty() ? o.t_obs : lu.times.back(),
                                              o.t_obs,
                                              {}});
                    open_gap = &lp.gaps.back();
                }
                open_gap->t_end = o.t_obs;
                open_gap->missing_times.push_back(o.t_obs);
            }
        }
        if (!lu.times.empty()) lp.units.push_back(std::move(lu));
    }
    return lp;
}

void rescale_time(LatentPanel& lp, const TimeRescaling& rescaling) {
    rescaling.validate();
    const double a = rescaling.alpha / lp.rescaling.alpha;
    for (auto& u : lp.units)
        for (auto& t : u.times) t *= a;
    for (auto& g : lp.gaps) {
        g.t_start *= a;
        g.t_end *= a;
        for (auto& t : g.missing_times) t *= a;
    }
    lp.rescaling = rescaling;
}

}  // namespace panelsde
