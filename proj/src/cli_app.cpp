#include "panelsde/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "panelsde/diagnostics.hpp"
#include "panelsde/hash.hpp"
#include "panelsde/impute.hpp"
#include "panelsde/model_io.hpp"
#include "panelsde/simulate.hpp"
#include "panelsde/version.hpp"

namespace panelsde::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Flags shared by every command. alpha = 0 / nsub = 0 mean "keep the value
// stored in the panel file".
struct Common {
    uint64_t seed = 0;
    double alpha = 0.0;
    int nsub = 0;
    int workers = 1;
    std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "master RNG seed")->capture_default_str();
    cmd->add_option("--alpha", c.alpha,
                    "simulation time per observed time unit (0 keeps the panel's value)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--nsub", c.nsub, "sub-steps per observation interval (0 keeps the panel's)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    cmd->add_option("--workers", c.workers, "worker thread cap (0 = one per core)")
        ->capture_default_str();
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

// Every artifact carries the hash of the effective configuration and the
// seed, so a file can always be traced back to the exact invocation.
struct Sink {
    fs::path dir;
    std::string hash;
    uint64_t seed = 0;

    Sink(const Common& c, const json& config) : dir(c.out), seed(c.seed) {
        hash = hex64(fnv1a64(config.dump()));
        fs::create_directories(dir);
    }

    fs::path path(const std::string& name) const { return dir / name; }

    void write_json(const std::string& name, json j) const {
        j["config_hash"] = hash;
        j["seed"] = seed;
        std::ofstream out(path(name), std::ios::binary);
        if (!out) throw InputError("cannot write '" + path(name).string() + "'");
        out << j.dump(2) << '\n';
    }

    std::ofstream open_csv(const std::string& name, const std::string& header) const {
        std::ofstream out(path(name), std::ios::binary);
        if (!out) throw InputError("cannot write '" + path(name).string() + "'");
        out << "# config_hash=" << hash << " seed=" << seed << '\n' << header << '\n';
        return out;
    }
};

LatentPanel load_panel(const std::string& path, const Common& c, PcaModel* pca = nullptr) {
    LatentPanel lp = panel_from_json(load_json_file(path), pca);
    TimeRescaling r = lp.rescaling;
    if (c.alpha > 0.0) r.alpha = c.alpha;
    if (c.nsub > 0) r.n_sub = c.nsub;
    rescale_time(lp, r);
    return lp;
}

TransitionMethod make_method(const std::string& name, int n_sub, int kde_samples, uint64_t seed) {
    if (name == "one_step") return TransitionMethod::one_step();
    if (name == "composed") return TransitionMethod::composed(n_sub);
    if (name == "kde") return TransitionMethod::kde(kde_samples, seed, n_sub);
    throw InputError("unknown transition method '" + name + "'");
}

std::vector<int> resolve_columns(const Panel& panel, const std::vector<std::string>& names,
                                 const char* what) {
    std::vector<int> idx;
    for (const auto& name : names) {
        const int i = panel.column_index(name);
        if (i < 0) throw SchemaError(std::string(what) + " column '" + name + "' not in input");
        idx.push_back(i);
    }
    return idx;
}

// --- ingest ---

struct IngestArgs {
    Common c;
    std::string input;
    int k = 1;
    std::vector<std::string> log_cols, anchor_cols, passthrough_cols;
    std::string unit_col = "unit", time_col = "time";
};

json ingest_config(const IngestArgs& a) {
    return {{"command", "ingest"},       {"input", a.input},
            {"k", a.k},                  {"log_columns", a.log_cols},
            {"anchors", a.anchor_cols},  {"passthrough", a.passthrough_cols},
            {"unit_col", a.unit_col},    {"time_col", a.time_col},
            {"alpha", a.c.alpha},        {"n_sub", a.c.nsub},
            {"seed", a.c.seed}};
}

void cmd_ingest(const IngestArgs& a) {
    const Panel panel = ingest_csv(a.input, {a.unit_col, a.time_col});
    const PcaModel pca =
        pca_fit(panel, a.k, resolve_columns(panel, a.log_cols, "log"),
                resolve_columns(panel, a.anchor_cols, "anchor"),
                resolve_columns(panel, a.passthrough_cols, "passthrough"));
    LatentPanel lp = pca_project(pca, panel);
    rescale_time(lp, {a.c.alpha, a.c.nsub});

    const Sink sink(a.c, ingest_config(a));
    sink.write_json("panel.json", panel_to_json(lp, &pca));

    json report;
    report["columns"] = pca.columns;
    report["loadings"] = mat_to_json(pca.components);
    report["explained_variance_ratio"] = vec_to_json(pca.explained_variance_ratio);
    report["sign_anchors"] = pca.sign_anchors;
    report["passthrough"] = pca.passthrough;
    report["n_units"] = lp.units.size();
    report["n_states"] = lp.n_states();
    report["n_gaps"] = lp.gaps.size();
    sink.write_json("pca_report.json", std::move(report));

    std::cout << "wrote " << sink.path("panel.json").string() << " (" << lp.units.size()
              << " units, " << lp.n_states() << " states, " << lp.gaps.size() << " gaps)\n";
}

// --- fit ---

struct FitArgs {
    Common c;
    std::string panel;
    std::string estimator;
    double lr = 0.0;  // 0 = estimator default
    // lbn
    std::vector<int> widths{64, 64, 64};
    int batch = 64, epochs = 400, kfolds = 5, nens = 30;
    // npsde
    int grid = 5, mc_paths = 128, iterations = 300;
    double dt_sim = 0.05, restart = 50.0, jitter = 1e-6;
    bool no_fit_r = false;
};

json fit_config(const FitArgs& a) {
    json j = {{"command", "fit"},   {"panel", a.panel}, {"estimator", a.estimator},
              {"lr", a.lr},         {"alpha", a.c.alpha}, {"n_sub", a.c.nsub},
              {"seed", a.c.seed}};
    if (a.estimator == "lbn") {
        j["widths"] = a.widths;
        j["batch"] = a.batch;
        j["epochs"] = a.epochs;
        j["kfolds"] = a.kfolds;
        j["nens"] = a.nens;
    } else {
        j["grid"] = a.grid;
        j["mc_paths"] = a.mc_paths;
        j["iterations"] = a.iterations;
        j["dt_sim"] = a.dt_sim;
        j["restart_factor"] = a.restart;
        j["jitter"] = a.jitter;
        j["fit_R"] = !a.no_fit_r;
    }
    return j;
}

void cmd_fit(const FitArgs& a) {
    const LatentPanel lp = load_panel(a.panel, a.c);
    const Sink sink(a.c, fit_config(a));

    if (a.estimator == "lbn") {
        lbn::LbnHyper hyper;
        hyper.widths = a.widths;
        if (a.lr > 0.0) hyper.lr = a.lr;
        hyper.batch = a.batch;
        hyper.max_epochs = a.epochs;
        hyper.k_folds = a.kfolds;
        hyper.n_ens = a.nens;
        lbn::LbnTrainLog log;
        const lbn::LbnEnsemble ens =
            lbn::train_lbn(lbn::km_targets(lp), hyper, a.c.seed, a.c.workers, &log);
        sink.write_json("model.json", lbn_to_json(ens, hyper, log));

        json jlog;
        jlog["estimator"] = "lbn";
        jlog["fold_seeds"] = log.fold_seeds;
        json folds = json::array();
        for (const auto& f : log.folds) {
            folds.push_back({{"val_units", f.val_units},
                             {"epochs_run", f.epochs_run},
                             {"swa_start_epoch", f.swa_start_epoch},
                             {"final_val_loss", f.final_val_loss},
                             {"val_loss_history", f.val_loss_history}});
        }
        jlog["folds"] = std::move(folds);
        jlog["excluded_gap_transitions"] = log.excluded_gap_transitions;
        jlog["swa_rule"] = log.swa_rule;
        sink.write_json("fit_log.json", std::move(jlog));
    } else {
        npsde::NpsdeConfig cfg;
        cfg.grid_per_dim = a.grid;
        cfg.S = a.mc_paths;
        cfg.iterations = a.iterations;
        if (a.lr > 0.0) cfg.lr = a.lr;
        cfg.dt_sim = a.dt_sim;
        cfg.jitter = a.jitter;
        cfg.fit_R = !a.no_fit_r;
        cfg.restart_factor = a.restart;
        npsde::FitLog log;
        const npsde::NpsdeModel model =
            npsde::fit(lp, cfg, RngStream(a.c.seed), a.c.workers, &log);
        sink.write_json("model.json", npsde_to_json(model, log));

        json jlog;
        jlog["estimator"] = "npsde";
        jlog["objectives"] = log.objectives;
        jlog["final_grad_norm"] = log.final_grad_norm;
        jlog["underparameterized"] = log.underparameterized;
        sink.write_json("fit_log.json", std::move(jlog));
    }
    std::cout << "wrote " << sink.path("model.json").string() << '\n';
}

// --- simulate ---

struct SimulateArgs {
    Common c;
    std::string model, panel, unit;
    std::vector<double> start;
    double horizon = 10.0;
    int paths = 100;
};

json simulate_config(const SimulateArgs& a) {
    return {{"command", "simulate"}, {"model", a.model},     {"panel", a.panel},
            {"unit", a.unit},        {"start", a.start},     {"horizon", a.horizon},
            {"paths", a.paths},      {"alpha", a.c.alpha},   {"n_sub", a.c.nsub},
            {"seed", a.c.seed}};
}

void cmd_simulate(const SimulateArgs& a) {
    const StoredModel sm = load_model_file(a.model);
    const int d = sm.model->dim();

    Vec x0 = a.start;
    double alpha = a.c.alpha > 0.0 ? a.c.alpha : 1.0;
    int n_sub = a.c.nsub > 0 ? a.c.nsub : 1;
    if (x0.empty()) {
        if (a.panel.empty()) throw InputError("need --start or --panel to pick a start state");
        const LatentPanel lp = load_panel(a.panel, a.c);
        alpha = lp.rescaling.alpha;
        n_sub = lp.rescaling.n_sub;
        const LatentUnit* u = nullptr;
        if (a.unit.empty()) {
            if (lp.units.empty()) throw InsufficientDataError("panel has no units");
            u = &lp.units.front();
        } else {
            for (const auto& cand : lp.units)
                if (cand.id == a.unit) u = &cand;
            if (u == nullptr) throw InputError("unit '" + a.unit + "' not in panel");
        }
        x0 = u->states.back();
    }
    if (static_cast<int>(x0.size()) != d) {
        throw ShapeError("start state has " + std::to_string(x0.size()) + " coordinates, model needs " +
                         std::to_string(d));
    }
    if (!(a.horizon > 0.0)) throw InputError("horizon must be positive");

    const int n = std::max<int>(1, static_cast<int>(std::llround(a.horizon / alpha)));
    std::vector<double> times(n);
    for (int i = 0; i < n; ++i) times[i] = (i + 1) * alpha;

    const PathEnsemble ens = simulate_ensemble(*sm.model, x0, times, a.paths, n_sub,
                                               RngStream(a.c.seed), a.c.workers);

    const Sink sink(a.c, simulate_config(a));
    std::string header = "path,time";
    for (int k = 0; k < d; ++k) header += ",x" + std::to_string(k + 1);
    auto pf = sink.open_csv("paths.csv", header);
    for (int s = 0; s < ens.size(); ++s) {
        for (size_t i = 0; i < ens.times.size(); ++i) {
            pf << s << ',' << fmt(ens.times[i]);
            for (double v : ens.paths[s][i]) pf << ',' << fmt(v);
            pf << '\n';
        }
    }

    header = "time";
    for (int k = 0; k < d; ++k) header += ",mean_x" + std::to_string(k + 1);
    for (int k = 0; k < d; ++k) header += ",std_x" + std::to_string(k + 1);
    auto sf = sink.open_csv("summary.csv", header);
    for (size_t i = 0; i < ens.times.size(); ++i) {
        const Vec m = ens.mean_at(i);
        const Vec v = ens.variance_at(i);
        sf << fmt(ens.times[i]);
        for (double x : m) sf << ',' << fmt(x);
        for (double x : v) sf << ',' << fmt(std::sqrt(std::max(0.0, x)));
        sf << '\n';
    }
    std::cout << "wrote " << sink.path("paths.csv").string() << " (" << a.paths << " paths, " << n
              << " steps)\n";
}

// --- diagnose ---

struct DiagnoseArgs {
    Common c;
    std::string model, panel, method = "composed";
    int samples = 1000, kde_samples = 512;
};

json diagnose_config(const DiagnoseArgs& a) {
    return {{"command", "diagnose"},       {"model", a.model},   {"panel", a.panel},
            {"method", a.method},          {"samples", a.samples},
            {"kde_samples", a.kde_samples}, {"alpha", a.c.alpha}, {"n_sub", a.c.nsub},
            {"seed", a.c.seed}};
}

void cmd_diagnose(const DiagnoseArgs& a) {
    const StoredModel sm = load_model_file(a.model);
    const LatentPanel lp = load_panel(a.panel, a.c);
    if (lp.n_transitions() == 0) throw InsufficientDataError("panel has no transitions");

    const TransitionMethod method =
        make_method(a.method, lp.rescaling.n_sub, a.kde_samples, a.c.seed);
    const DiagnosticsReport rep =
        compute_diagnostics(*sm.model, lp, method, a.samples, a.c.seed, a.c.workers);

    const Sink sink(a.c, diagnose_config(a));
    auto f = sink.open_csv("diagnostics.csv",
                           "unit,t_from,t_to,sigma,Sigma_cum,s,s_tilde,tail_prob");
    std::string current;
    double cum = 0.0;
    for (const auto& r : rep.records) {
        if (r.unit != current) {
            current = r.unit;
            cum = 0.0;
        }
        cum += r.sigma;
        f << r.unit << ',' << fmt(r.t_from) << ',' << fmt(r.t_to) << ',' << fmt(r.sigma) << ','
          << fmt(cum) << ',' << fmt(r.s) << ',' << fmt(r.s_tilde) << ',' << fmt(r.tail_prob)
          << '\n';
    }

    json summary;
    summary["method"] = a.method;
    summary["S"] = rep.S;
    json units = json::array();
    for (const auto& u : rep.units) {
        double t_first = 0.0, t_last = 0.0;
        size_t n = 0;
        for (const auto& r : rep.records) {
            if (r.unit != u.unit) continue;
            if (n == 0) t_first = r.t_from;
            t_last = r.t_to;
            ++n;
        }
        const double span = t_last - t_first;
        units.push_back({{"unit", u.unit},
                         {"Sigma", u.Sigma},
                         {"Sigma_per_time", span > 0.0 ? u.Sigma / span : 0.0},
                         {"n_transitions", n}});
    }
    summary["units"] = std::move(units);
    double mean_s_tilde = 0.0;
    const TransitionRecord* min_tail = nullptr;
    for (const auto& r : rep.records) {
        mean_s_tilde += r.s_tilde;
        if (min_tail == nullptr || r.tail_prob < min_tail->tail_prob) min_tail = &r;
    }
    summary["mean_s_tilde"] = mean_s_tilde / static_cast<double>(rep.records.size());
    summary["min_tail"] = {{"unit", min_tail->unit},
                           {"t_from", min_tail->t_from},
                           {"t_to", min_tail->t_to},
                           {"tail_prob", min_tail->tail_prob}};
    sink.write_json("diagnostics_summary.json", std::move(summary));
    std::cout << "wrote " << sink.path("diagnostics.csv").string() << " (" << rep.records.size()
              << " transitions)\n";
}

// --- impute ---

struct ImputeArgs {
    Common c;
    std::string model, panel, method = "composed";
    int paths = 1000, kde_samples = 512;
};

json impute_config(const ImputeArgs& a) {
    return {{"command", "impute"},        {"model", a.model},   {"panel", a.panel},
            {"method", a.method},         {"paths", a.paths},
            {"kde_samples", a.kde_samples}, {"alpha", a.c.alpha}, {"n_sub", a.c.nsub},
            {"seed", a.c.seed}};
}

void cmd_impute(const ImputeArgs& a) {
    const StoredModel sm = load_model_file(a.model);
    const LatentPanel lp = load_panel(a.panel, a.c);
    const int d = lp.dim();
    const TransitionMethod method =
        make_method(a.method, lp.rescaling.n_sub, a.kde_samples, a.c.seed);

    const Sink sink(a.c, impute_config(a));
    std::string header = "unit,time";
    for (const auto& name : lp.state_names) header += ",mean_" + name;
    for (const auto& name : lp.state_names) header += ",std_" + name;
    header += ",ess,low_ess";
    auto f = sink.open_csv("imputed.csv", header);

    size_t rows = 0, skipped = 0;
    std::string current_unit;
    uint64_t gap_index = 0;
    for (const auto& g : lp.gaps) {
        if (g.unit != current_unit) {
            current_unit = g.unit;
            gap_index = 0;
        }
        const uint64_t this_gap = gap_index++;
        const LatentUnit* u = nullptr;
        for (const auto& cand : lp.units)
            if (cand.id == g.unit) u = &cand;
        const Vec* x0 = nullptr;
        const Vec* xT = nullptr;
        if (u != nullptr) {
            for (size_t i = 0; i < u->times.size(); ++i) {
                if (u->times[i] == g.t_start) x0 = &u->states[i];
                if (u->times[i] == g.t_end) xT = &u->states[i];
            }
        }
        // Gaps at the edge of a unit have no bracketing state on one side and
        // cannot be bridged.
        if (x0 == nullptr || xT == nullptr || !(g.t_start < g.t_end) || g.missing_times.empty()) {
            ++skipped;
            continue;
        }
        RngStream rng = RngStream(a.c.seed, fnv1a64(g.unit)).derive(this_gap);
        const auto samples = impute_gap(*sm.model, *x0, g.t_start, *xT, g.t_end, g.missing_times,
                                        a.paths, lp.rescaling.n_sub, method, rng);
        for (const auto& s : samples) {
            const Vec m = s.mean();
            const Vec sd = s.std();
            f << g.unit << ',' << fmt(s.query_time);
            for (int k = 0; k < d; ++k) f << ',' << fmt(m[k]);
            for (int k = 0; k < d; ++k) f << ',' << fmt(sd[k]);
            f << ',' << fmt(s.ess) << ',' << (s.low_ess ? 1 : 0) << '\n';
            ++rows;
        }
    }
    std::cout << "wrote " << sink.path("imputed.csv").string() << " (" << rows << " states, "
              << skipped << " gaps skipped)\n";
}

// --- validate ---

struct ValidateArgs {
    Common c;
    std::string model, panel;
    int max_lag = 20;
};

json validate_config(const ValidateArgs& a) {
    return {{"command", "validate"}, {"model", a.model},   {"panel", a.panel},
            {"max_lag", a.max_lag},  {"alpha", a.c.alpha}, {"n_sub", a.c.nsub},
            {"seed", a.c.seed}};
}

// Pooled ACF over per-unit segments of one coordinate: pooled mean and
// variance, lag products never straddling segment boundaries.
Vec pooled_acf(const std::vector<std::vector<double>>& segments, int max_lag) {
    size_t n = 0;
    double mean = 0.0;
    for (const auto& seg : segments) {
        n += seg.size();
        for (double v : seg) mean += v;
    }
    if (n < static_cast<size_t>(max_lag) + 2) {
        throw InsufficientDataError("need at least " + std::to_string(max_lag + 2) +
                                    " states for lag " + std::to_string(max_lag) + ", got " +
                                    std::to_string(n));
    }
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (const auto& seg : segments)
        for (double v : seg) denom += (v - mean) * (v - mean);
    if (denom == 0.0) throw DegenerateSeriesError("constant state series");
    Vec acf(max_lag + 1, 0.0);
    acf[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        double num = 0.0;
        for (const auto& seg : segments)
            for (size_t t = 0; t + lag < seg.size(); ++t)
                num += (seg[t] - mean) * (seg[t + lag] - mean);
        acf[lag] = num / denom;
    }
    return acf;
}

void cmd_validate(const ValidateArgs& a) {
    const StoredModel sm = load_model_file(a.model);
    const LatentPanel lp = load_panel(a.panel, a.c);
    const int d = lp.dim();

    const std::vector<AcfSeries> resid = residual_acf(*sm.model, lp, a.max_lag);

    // One simulated replicate per unit on the unit's own observation times.
    std::vector<std::vector<std::vector<double>>> data_segs(d), sim_segs(d);
    for (const auto& u : lp.units) {
        if (u.states.size() < 2) continue;
        std::vector<double> rel(u.times.begin() + 1, u.times.end());
        for (auto& t : rel) t -= u.times.front();
        RngStream rng(a.c.seed, fnv1a64(u.id));
        const Path sim = simulate_path_at(*sm.model, u.states.front(), rel,
                                          lp.rescaling.n_sub, rng);
        for (int k = 0; k < d; ++k) {
            std::vector<double> dcol, scol;
            for (const auto& x : u.states) dcol.push_back(x[k]);
            for (const auto& x : sim.states) scol.push_back(x[k]);
            data_segs[k].push_back(std::move(dcol));
            sim_segs[k].push_back(std::move(scol));
        }
    }

    const Sink sink(a.c, validate_config(a));
    auto cf = sink.open_csv("acf_compare.csv", "dim,lag,acf_data,acf_sim");
    for (int k = 0; k < d; ++k) {
        const Vec da = pooled_acf(data_segs[k], a.max_lag);
        const Vec sa = pooled_acf(sim_segs[k], a.max_lag);
        for (int lag = 0; lag <= a.max_lag; ++lag)
            cf << k + 1 << ',' << lag << ',' << fmt(da[lag]) << ',' << fmt(sa[lag]) << '\n';
    }

    auto rf = sink.open_csv("residual_acf.csv", "dim,lag,acf,band");
    int inside = 0;
    json per_dim = json::array();
    for (int k = 0; k < d; ++k) {
        int dim_inside = 0;
        for (int lag = 1; lag <= a.max_lag; ++lag) {
            if (std::abs(resid[k].acf[lag]) <= resid[k].band) ++dim_inside;
            rf << k + 1 << ',' << lag << ',' << fmt(resid[k].acf[lag]) << ','
               << fmt(resid[k].band) << '\n';
        }
        inside += dim_inside;
        per_dim.push_back({{"dim", k + 1},
                           {"fraction_inside",
                            static_cast<double>(dim_inside) / static_cast<double>(a.max_lag)}});
    }
    const double fraction = static_cast<double>(inside) / static_cast<double>(d * a.max_lag);
    const bool pass = fraction >= 0.93;

    json report;
    report["verdict"] = pass ? "pass" : "fail";
    report["fraction_inside"] = fraction;
    report["threshold"] = 0.93;
    report["max_lag"] = a.max_lag;
    report["n_residuals"] = resid.front().n;
    report["band"] = resid.front().band;
    report["dims"] = std::move(per_dim);
    sink.write_json("validation.json", std::move(report));
    std::cout << "markovianity " << (pass ? "pass" : "fail") << " (" << fmt(fraction * 100.0)
              << "% of lags inside the 95% band)\n";
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"SDE toolkit for sparse panel data: drift/diffusion estimation, "
                 "irreversibility and surprisal diagnostics, bridge imputation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ci = app.add_subcommand("ingest", "project a raw CSV panel onto latent coordinates");
    ci->add_option("--input", ingest.input, "panel CSV")->required()->check(CLI::ExistingFile);
    ci->add_option("--k", ingest.k, "retained components")->required()->check(CLI::PositiveNumber);
    ci->add_option("--log-columns", ingest.log_cols, "columns log10-transformed before scaling")
        ->delimiter(',');
    ci->add_option("--anchors", ingest.anchor_cols, "sign anchor column per component")
        ->delimiter(',');
    ci->add_option("--passthrough", ingest.passthrough_cols,
                   "columns appended as standardized extra coordinates")
        ->delimiter(',');
    ci->add_option("--unit-col", ingest.unit_col, "unit id column")->capture_default_str();
    ci->add_option("--time-col", ingest.time_col, "observation time column")->capture_default_str();
    ingest.c.alpha = 1.0;
    ingest.c.nsub = 1;
    add_common(ci, ingest.c);
    ci->callback([&] { cmd_ingest(ingest); });

    FitArgs fit;
    auto* cf = app.add_subcommand("fit", "estimate drift and diffusion from a latent panel");
    cf->add_option("--panel", fit.panel, "latent panel JSON")->required()->check(CLI::ExistingFile);
    cf->add_option("--estimator", fit.estimator, "lbn (network ensemble) or npsde (GP collocation)")
        ->required()
        ->check(CLI::IsMember({"lbn", "npsde"}));
    cf->add_option("--lr", fit.lr, "learning rate (0 = estimator default)");
    cf->add_option("--widths", fit.widths, "lbn hidden layer widths")->delimiter(',');
    cf->add_option("--batch", fit.batch, "lbn minibatch size")->capture_default_str();
    cf->add_option("--epochs", fit.epochs, "lbn epoch cap")->capture_default_str();
    cf->add_option("--kfolds", fit.kfolds, "lbn validation folds")->capture_default_str();
    cf->add_option("--nens", fit.nens, "lbn posterior draws")->capture_default_str();
    cf->add_option("--grid", fit.grid, "npsde inducing points per dimension")
        ->capture_default_str();
    cf->add_option("--mc-paths", fit.mc_paths, "npsde Monte-Carlo paths per unit")
        ->capture_default_str();
    cf->add_option("--iterations", fit.iterations, "npsde optimizer iterations")
        ->capture_default_str();
    cf->add_option("--dt-sim", fit.dt_sim, "npsde integration sub-step")->capture_default_str();
    cf->add_option("--restart-factor", fit.restart, "npsde gap restart threshold, units of dt-sim")
        ->capture_default_str();
    cf->add_option("--jitter", fit.jitter, "npsde Gram jitter")->capture_default_str();
    cf->add_flag("--no-fit-r", fit.no_fit_r, "freeze npsde observation noise");
    add_common(cf, fit.c);
    cf->callback([&] { cmd_fit(fit); });

    SimulateArgs sim;
    auto* cs = app.add_subcommand("simulate", "integrate a path ensemble under a fitted model");
    cs->add_option("--model", sim.model, "model JSON")->required()->check(CLI::ExistingFile);
    cs->add_option("--panel", sim.panel, "latent panel JSON (start = a unit's last state)")
        ->check(CLI::ExistingFile);
    cs->add_option("--unit", sim.unit, "unit id to start from (default: first unit)");
    cs->add_option("--start", sim.start, "explicit start state")->delimiter(',');
    cs->add_option("--horizon", sim.horizon, "simulated time span")->capture_default_str();
    cs->add_option("--paths", sim.paths, "ensemble size")->capture_default_str();
    add_common(cs, sim.c);
    cs->callback([&] { cmd_simulate(sim); });

    DiagnoseArgs diag;
    auto* cd = app.add_subcommand("diagnose",
                                  "per-transition irreversibility, surprisal and tail scores");
    cd->add_option("--model", diag.model, "model JSON")->required()->check(CLI::ExistingFile);
    cd->add_option("--panel", diag.panel, "latent panel JSON")
        ->required()
        ->check(CLI::ExistingFile);
    cd->add_option("--method", diag.method, "transition density: one_step, composed, kde")
        ->check(CLI::IsMember({"one_step", "composed", "kde"}))
        ->capture_default_str();
    cd->add_option("--samples", diag.samples, "successor draws per transition")
        ->capture_default_str();
    cd->add_option("--kde-samples", diag.kde_samples, "endpoint draws for the kde method")
        ->capture_default_str();
    add_common(cd, diag.c);
    cd->callback([&] { cmd_diagnose(diag); });

    ImputeArgs imp;
    auto* cm = app.add_subcommand("impute", "bridge posteriors for recorded gaps");
    cm->add_option("--model", imp.model, "model JSON")->required()->check(CLI::ExistingFile);
    cm->add_option("--panel", imp.panel, "latent panel JSON")->required()->check(CLI::ExistingFile);
    cm->add_option("--method", imp.method, "endpoint weighting density: one_step, composed, kde")
        ->check(CLI::IsMember({"one_step", "composed", "kde"}))
        ->capture_default_str();
    cm->add_option("--paths", imp.paths, "bridge candidates per gap")->capture_default_str();
    cm->add_option("--kde-samples", imp.kde_samples, "endpoint draws for the kde method")
        ->capture_default_str();
    add_common(cm, imp.c);
    cm->callback([&] { cmd_impute(imp); });

    ValidateArgs val;
    auto* cv = app.add_subcommand("validate", "ACF comparison and Markovianity verdict");
    cv->add_option("--model", val.model, "model JSON")->required()->check(CLI::ExistingFile);
    cv->add_option("--panel", val.panel, "latent panel JSON")->required()->check(CLI::ExistingFile);
    cv->add_option("--max-lag", val.max_lag, "largest residual lag tested")->capture_default_str();
    add_common(cv, val.c);
    cv->callback([&] { cmd_validate(val); });

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("panelsde");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace panelsde::cli
