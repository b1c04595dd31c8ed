#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "panelsde/lbn.hpp"
#include "panelsde/npsde.hpp"
#include "panelsde/pca.hpp"

namespace panelsde {

using json = nlohmann::json;

json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j);
json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);

json pca_to_json(const PcaModel& m);
PcaModel pca_from_json(const json& j);

// Latent panel file: states, times, gaps, rescaling, and the fitted column
// transform that produced the states.
json panel_to_json(const LatentPanel& lp, const PcaModel* pca = nullptr);
LatentPanel panel_from_json(const json& j, PcaModel* pca_out = nullptr);

json lbn_to_json(const lbn::LbnEnsemble& ens, const lbn::LbnHyper& hyper,
                 const lbn::LbnTrainLog& log);
lbn::LbnEnsemble lbn_from_json(const json& j);

json npsde_to_json(const npsde::NpsdeModel& model, const npsde::FitLog& log);
npsde::NpsdeModel npsde_from_json(const json& j);

json linear_to_json(const LinearSde& model);
LinearSde linear_from_json(const json& j);

// Any dynamics file: kind is "lbn", "npsde" or "linear".
struct StoredModel {
    std::string kind;
    std::shared_ptr<SdeModel> model;
    json raw;  // full document, for metadata echo
};

StoredModel model_from_json(const json& j);
StoredModel load_model_file(const std::string& path);
json load_json_file(const std::string& path);

}  // namespace panelsde
