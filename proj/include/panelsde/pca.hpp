#pragma once

#include <string>
#include <vector>

#include "panelsde/linalg.hpp"
#include "panelsde/panel.hpp"
#include "panelsde/rescaling.hpp"

namespace panelsde {

// Column transform + projection fitted on pooled complete-case rows.
// Designated columns are log10-transformed, all columns are standardized, and
// the top-k eigenvectors of the resulting correlation matrix become the
// retained components. Pass-through columns additionally keep their
// standardized values as extra state coordinates.
struct PcaModel {
    std::vector<std::string> columns;  // value columns at fit time
    std::vector<int> log_columns;      // indices log10-transformed before standardization
    Vec column_means;
    Vec column_stds;
    Mat components;                  // k x p, orthonormal rows
    Vec explained_variance_ratio;    // non-increasing, each in (0, 1]
    std::vector<int> sign_anchors;   // per component, column whose loading is kept >= 0
    std::vector<int> passthrough;    // columns appended (standardized) after the scores

    int k() const { return components.rows(); }
    int p() const { return static_cast<int>(columns.size()); }
    int d() const { return k() + static_cast<int>(passthrough.size()); }

    // Log-transform + standardize one raw row (must be complete).
    Vec standardize(const Vec& raw) const;
    // Scores for one standardized row, pass-through coordinates appended.
    Vec project_row(const Vec& z) const;
};

struct LatentUnit {
    std::string id;
    std::vector<double> times;    // strictly increasing
    std::vector<Vec> states;      // complete d-vectors
};

// A maximal run of observations that could not be projected (some value
// missing). t_start/t_end are the bracketing retained times where they exist,
// otherwise the run's own first/last time; missing_times lists the dropped
// observation times.
struct GapSpan {
    std::string unit;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<double> missing_times;
};

struct LatentPanel {
    std::vector<std::string> state_names;
    std::vector<LatentUnit> units;
    std::vector<GapSpan> gaps;
    TimeRescaling rescaling;  // identity until rescale_time is applied

    int dim() const { return static_cast<int>(state_names.size()); }
    size_t n_states() const;
    size_t n_transitions() const;
};

// Fits the transform on complete-case rows pooled across units. Anchor list
// may be empty (anchor defaults to the column with the largest absolute
// loading) or give one raw column index per component.
// Throws InsufficientDataError with fewer than p+1 complete rows and
// DegenerateColumnError for a zero-variance column.
PcaModel pca_fit(const Panel& panel, int k, const std::vector<int>& log_columns = {},
                 const std::vector<int>& anchors = {},
                 const std::vector<int>& passthrough = {});

// Maps every complete observation to its latent state; incomplete
// observations are recorded into gaps. Times stay in observed units until
// rescale_time is applied. Throws SchemaError if the panel columns do not
// match the model.
LatentPanel pca_project(const PcaModel& model, const Panel& panel);

// t = alpha * t_obs, applied to unit times and gap spans.
void rescale_time(LatentPanel& lp, const TimeRescaling& rescaling);

}  // namespace panelsde
