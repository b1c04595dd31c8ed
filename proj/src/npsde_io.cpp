#include "panelsde/model_io.hpp"
#include "panelsde/version.hpp"

namespace panelsde {

namespace {

json kernel_to_json(const npsde::SqExpKernel& k) {
    return {{"log_var", k.log_var}, {"log_length", vec_to_json(k.log_length)}};
}

npsde::SqExpKernel kernel_from_json(const json& j) {
    npsde::SqExpKernel k;
    k.log_var = j.at("log_var").get<double>();
    k.log_length = vec_from_json(j.at("log_length"));
    return k;
}

}  // namespace

json npsde_to_json(const npsde::NpsdeModel& model, const npsde::FitLog& log) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "npsde";
    j["d"] = model.dim();
    json inducing = json::array();
    for (const auto& z : model.inducing()) inducing.push_back(vec_to_json(z));
    j["inducing"] = std::move(inducing);
    j["kernel_f"] = kernel_to_json(model.kernel_f());
    j["kernel_b"] = kernel_to_json(model.kernel_b());
    j["u_f"] = mat_to_json(model.u_f());
    j["u_b"] = vec_to_json(model.u_b());
    j["log_r"] = vec_to_json(model.log_r());
    j["jitter"] = model.jitter();
    j["dt_sim"] = model.dt_sim();
    j["restart_factor"] = model.restart_factor();
    j["fit"] = {{"iterations", log.objectives.size()},
                {"final_objective", log.objectives.empty() ? 0.0 : log.objectives.back()},
                {"final_grad_norm", log.final_grad_norm},
                {"underparameterized", log.underparameterized},
                {"S", log.config.S},
                {"lr", log.config.lr},
                {"fit_R", log.config.fit_R}};
    return j;
}

npsde::NpsdeModel npsde_from_json(const json& j) {
    std::vector<Vec> inducing;
    for (const auto& z : j.at("inducing")) inducing.push_back(vec_from_json(z));
    if (inducing.empty()) throw SchemaError("model has no inducing points");
    const int d = j.at("d").get<int>();
    for (const auto& z : inducing) {
        if (static_cast<int>(z.size()) != d) throw SchemaError("inducing point dimension mismatch");
    }
    npsde::SqExpKernel kf = kernel_from_json(j.at("kernel_f"));
    npsde::SqExpKernel kb = kernel_from_json(j.at("kernel_b"));
    Mat u_f = mat_from_json(j.at("u_f"));
    Vec u_b = vec_from_json(j.at("u_b"));
    Vec log_r = vec_from_json(j.at("log_r"));
    const int m = static_cast<int>(inducing.size());
    if (u_f.rows() != m || u_f.cols() != d || static_cast<int>(u_b.size()) != m ||
        static_cast<int>(log_r.size()) != d) {
        throw SchemaError("model blocks disagree on shape");
    }
    return npsde::NpsdeModel(std::move(inducing), std::move(kf), std::move(kb), std::move(u_f),
                             std::move(u_b), std::move(log_r), j.at("jitter").get<double>(),
                             j.at("dt_sim").get<double>(), j.at("restart_factor").get<double>());
}

}  // namespace panelsde
