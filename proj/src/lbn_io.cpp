#include "panelsde/base64.hpp"
#include "panelsde/model_io.hpp"
#include "panelsde/version.hpp"

namespace panelsde {

json lbn_to_json(const lbn::LbnEnsemble& ens, const lbn::LbnHyper& hyper,
                 const lbn::LbnTrainLog& log) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "lbn";
    j["d"] = ens.dim();
    j["widths"] = ens.drift_net().hidden();
    j["hyper"] = {{"lr", hyper.lr},
                  {"batch", hyper.batch},
                  {"max_epochs", hyper.max_epochs},
                  {"swa_window", hyper.swa_window},
                  {"swa_tol", hyper.swa_tol},
                  {"swa_collect", hyper.swa_collect},
                  {"k_folds", hyper.k_folds},
                  {"n_ens", hyper.n_ens}};
    json members = json::array();
    for (const auto& m : ens.members()) {
        members.push_back({{"drift", encode_doubles(m.drift)}, {"diff", encode_doubles(m.diff)}});
    }
    j["members"] = std::move(members);
    json folds = json::array();
    for (const auto& f : log.folds) {
        folds.push_back({{"val_units", f.val_units},
                         {"swa_start_epoch", f.swa_start_epoch},
                         {"epochs_run", f.epochs_run},
                         {"final_val_loss", f.final_val_loss}});
    }
    j["training"] = {{"fold_seeds", log.fold_seeds},
                     {"folds", std::move(folds)},
                     {"excluded_gap_transitions", log.excluded_gap_transitions},
                     {"swa_rule", log.swa_rule}};
    return j;
}

lbn::LbnEnsemble lbn_from_json(const json& j) {
    const int d = j.at("d").get<int>();
    const std::vector<int> widths = j.at("widths").get<std::vector<int>>();
    if (d < 1) throw SchemaError("network dimension must be positive");
    lbn::Mlp drift_net(d, widths, d);
    lbn::Mlp diff_net(d, widths, lbn::tri_size(d));
    std::vector<lbn::LbnParams> members;
    for (const auto& jm : j.at("members")) {
        lbn::LbnParams p;
        p.drift = decode_doubles(jm.at("drift").get<std::string>());
        p.diff = decode_doubles(jm.at("diff").get<std::string>());
        if (static_cast<int>(p.drift.size()) != drift_net.param_count() ||
            static_cast<int>(p.diff.size()) != diff_net.param_count()) {
            throw SchemaError("member parameter blob does not match the architecture");
        }
        members.push_back(std::move(p));
    }
    if (members.empty()) throw SchemaError("ensemble has no members");
    return lbn::LbnEnsemble(std::move(drift_net), std::move(diff_net), std::move(members));
}

}  // namespace panelsde
