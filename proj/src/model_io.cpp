#include "panelsde/model_io.hpp"

#include <fstream>
#include <sstream>

#include "panelsde/version.hpp"

namespace panelsde {

json vec_to_json(const Vec& v) {
    return json(v);
}

Vec vec_from_json(const json& j) {
    if (!j.is_array()) throw SchemaError("expected a numeric array");
    Vec v;
    v.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_number()) throw SchemaError("expected a numeric array");
        v.push_back(e.get<double>());
    }
    return v;
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j) {
    if (!j.is_array()) throw SchemaError("expected an array of rows");
    const int rows = static_cast<int>(j.size());
    if (rows == 0) return Mat();
    if (!j[0].is_array()) throw SchemaError("expected an array of rows");
    const int cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const Vec row = vec_from_json(j[i]);
        if (static_cast<int>(row.size()) != cols) throw SchemaError("ragged matrix rows");
        for (int c = 0; c < cols; ++c) m(i, c) = row[c];
    }
    return m;
}

namespace {

const json& require(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw SchemaError(std::string("missing field '") + key + "'");
    }
    return *it;
}

std::vector<int> ints_from_json(const json& j) {
    if (!j.is_array()) throw SchemaError("expected an integer array");
    std::vector<int> v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(e.get<int>());
    return v;
}

std::vector<std::string> strings_from_json(const json& j) {
    if (!j.is_array()) throw SchemaError("expected a string array");
    std::vector<std::string> v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(e.get<std::string>());
    return v;
}

}  // namespace

json pca_to_json(const PcaModel& m) {
    json j;
    j["columns"] = m.columns;
    j["log_columns"] = m.log_columns;
    j["column_means"] = vec_to_json(m.column_means);
    j["column_stds"] = vec_to_json(m.column_stds);
    j["components"] = mat_to_json(m.components);
    j["explained_variance_ratio"] = vec_to_json(m.explained_variance_ratio);
    j["sign_anchors"] = m.sign_anchors;
    j["passthrough"] = m.passthrough;
    return j;
}

PcaModel pca_from_json(const json& j) {
    PcaModel m;
    m.columns = strings_from_json(require(j, "columns"));
    m.log_columns = ints_from_json(require(j, "log_columns"));
    m.column_means = vec_from_json(require(j, "column_means"));
    m.column_stds = vec_from_json(require(j, "column_stds"));
    m.components = mat_from_json(require(j, "components"));
    m.explained_variance_ratio = vec_from_json(require(j, "explained_variance_ratio"));
    m.sign_anchors = ints_from_json(require(j, "sign_anchors"));
    m.passthrough = ints_from_json(require(j, "passthrough"));
    return m;
}

json panel_to_json(const LatentPanel& lp, const PcaModel* pca) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "latent_panel";
    j["state_names"] = lp.state_names;
    j["rescaling"] = {{"alpha", lp.rescaling.alpha}, {"n_sub", lp.rescaling.n_sub}};
    json units = json::array();
    for (const auto& u : lp.units) {
        json ju;
        ju["id"] = u.id;
        ju["times"] = vec_to_json(u.times);
        json states = json::array();
        for (const auto& s : u.states) states.push_back(vec_to_json(s));
        ju["states"] = std::move(states);
        units.push_back(std::move(ju));
    }
    j["units"] = std::move(units);
    json gaps = json::array();
    for (const auto& g : lp.gaps) {
        gaps.push_back({{"unit", g.unit},
                        {"t_start", g.t_start},
                        {"t_end", g.t_end},
                        {"missing_times", vec_to_json(g.missing_times)}});
    }
    j["gaps"] = std::move(gaps);
    if (pca != nullptr) j["transform"] = pca_to_json(*pca);
    return j;
}

LatentPanel panel_from_json(const json& j, PcaModel* pca_out) {
    if (require(j, "kind").get<std::string>() != "latent_panel") {
        throw SchemaError("not a latent panel file");
    }
    LatentPanel lp;
    lp.state_names = strings_from_json(require(j, "state_names"));
    const json& r = require(j, "rescaling");
    lp.rescaling.alpha = require(r, "alpha").get<double>();
    lp.rescaling.n_sub = require(r, "n_sub").get<int>();
    lp.rescaling.validate();
    const int d = lp.dim();
    for (const auto& ju : require(j, "units")) {
        LatentUnit u;
        u.id = require(ju, "id").get<std::string>();
        u.times = vec_from_json(require(ju, "times"));
        for (const auto& s : require(ju, "states")) {
            Vec state = vec_from_json(s);
            if (static_cast<int>(state.size()) != d) {
                throw SchemaError("state dimension does not match state_names");
            }
            u.states.push_back(std::move(state));
        }
        if (u.times.size() != u.states.size()) {
            throw SchemaError("unit '" + u.id + "' has mismatched times and states");
        }
        lp.units.push_back(std::move(u));
    }
    for (const auto& jg : require(j, "gaps")) {
        GapSpan g;
        g.unit = require(jg, "unit").get<std::string>();
        g.t_start = require(jg, "t_start").get<double>();
        g.t_end = require(jg, "t_end").get<double>();
        g.missing_times = vec_from_json(require(jg, "missing_times"));
        lp.gaps.push_back(std::move(g));
    }
    if (pca_out != nullptr && j.contains("transform")) *pca_out = pca_from_json(j["transform"]);
    return lp;
}

json linear_to_json(const LinearSde& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "linear";
    j["A"] = mat_to_json(model.A());
    j["c"] = vec_to_json(model.c());
    j["D"] = mat_to_json(model.D());
    return j;
}

LinearSde linear_from_json(const json& j) {
    Mat A = mat_from_json(require(j, "A"));
    Vec c = vec_from_json(require(j, "c"));
    Mat D = mat_from_json(require(j, "D"));
    const int d = static_cast<int>(c.size());
    if (A.rows() != d || A.cols() != d || D.rows() != d || D.cols() != d) {
        throw SchemaError("linear model blocks disagree on dimension");
    }
    return LinearSde(std::move(A), std::move(c), std::move(D));
}

StoredModel model_from_json(const json& j) {
    StoredModel out;
    out.kind = require(j, "kind").get<std::string>();
    out.raw = j;
    if (out.kind == "lbn") {
        out.model = std::make_shared<lbn::LbnEnsemble>(lbn_from_json(j));
    } else if (out.kind == "npsde") {
        out.model = std::make_shared<npsde::NpsdeModel>(npsde_from_json(j));
    } else if (out.kind == "linear") {
        out.model = std::make_shared<LinearSde>(linear_from_json(j));
    } else {
        throw SchemaError("unknown model kind '" + out.kind + "'");
    }
    return out;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

StoredModel load_model_file(const std::string& path) {
    try {
        return model_from_json(load_json_file(path));
    } catch (const json::exception& e) {
        throw SchemaError("'" + path + "': " + e.what());
    }
}

}  // namespace panelsde
