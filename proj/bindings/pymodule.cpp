#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "panelsde/cli.hpp"
#include "panelsde/diagnostics.hpp"
#include "panelsde/impute.hpp"
#include "panelsde/lbn.hpp"
#include "panelsde/model_io.hpp"
#include "panelsde/npsde.hpp"
#include "panelsde/simulate.hpp"
#include "panelsde/version.hpp"

namespace py = pybind11;
using namespace panelsde;

namespace {

py::list mat_to_list(const Mat& m) {
    py::list rows;
    for (int i = 0; i < m.rows(); ++i) {
        py::list row;
        for (int j = 0; j < m.cols(); ++j) row.append(m(i, j));
        rows.append(row);
    }
    return rows;
}

Mat mat_from_list(const std::vector<Vec>& rows) {
    if (rows.empty()) return {};
    Mat m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size())
            throw ShapeError("matrix rows must have equal length");
        for (size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
}

// Owning wrapper so every model kind crosses the boundary the same way.
struct PyModel {
    std::string kind;
    std::shared_ptr<SdeModel> model;
    json raw;

    const SdeModel& ref() const {
        if (!model) throw InputError("model is empty");
        return *model;
    }
};

PyModel wrap_stored(StoredModel sm) { return {sm.kind, sm.model, sm.raw}; }

TransitionMethod method_from(const std::string& name, int n_sub, int kde_samples, uint64_t seed) {
    if (name == "one_step") return TransitionMethod::one_step();
    if (name == "composed") return TransitionMethod::composed(n_sub);
    if (name == "kde") return TransitionMethod::kde(kde_samples, seed, n_sub);
    throw InputError("unknown transition method '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_panelsde, m) {
    m.doc() = "Stochastic differential equation toolkit for sparse panel data";
    m.attr("__version__") = kVersion;

    // Exception mapping: input problems -> ValueError, numerical failures ->
    // RuntimeError subclasses with the library message.
    static py::exception<NumericalError> numerical_error(m, "NumericalError");
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

    py::class_<Panel>(m, "Panel")
        .def_property_readonly("columns", [](const Panel& p) { return p.columns; })
        .def_property_readonly("n_units",
                               [](const Panel& p) { return p.units.size(); })
        .def_property_readonly("n_obs", [](const Panel& p) { return p.n_obs(); });

    py::class_<PcaModel>(m, "StateTransform")
        .def_property_readonly("k", &PcaModel::k)
        .def_property_readonly("p", &PcaModel::p)
        .def_property_readonly("explained_variance_ratio",
                               [](const PcaModel& m_) { return m_.explained_variance_ratio; })
        .def_property_readonly("components",
                               [](const PcaModel& m_) { return mat_to_list(m_.components); })
        .def("to_json", [](const PcaModel& m_) { return pca_to_json(m_).dump(); });

    py::class_<LatentPanel>(m, "LatentPanel")
        .def_property_readonly("dim", &LatentPanel::dim)
        .def_property_readonly("state_names",
                               [](const LatentPanel& lp) { return lp.state_names; })
        .def_property_readonly("n_states", &LatentPanel::n_states)
        .def_property_readonly("n_transitions", &LatentPanel::n_transitions)
        .def_property_readonly("unit_ids",
                               [](const LatentPanel& lp) {
                                   std::vector<std::string> ids;
                                   for (const auto& u : lp.units) ids.push_back(u.id);
                                   return ids;
                               })
        .def("unit_times",
             [](const LatentPanel& lp, const std::string& id) {
                 for (const auto& u : lp.units)
                     if (u.id == id) return u.times;
                 throw InputError("unknown unit '" + id + "'");
             })
        .def("unit_states",
             [](const LatentPanel& lp, const std::string& id) {
                 for (const auto& u : lp.units)
                     if (u.id == id) return u.states;
                 throw InputError("unknown unit '" + id + "'");
             })
        .def("to_json", [](const LatentPanel& lp) { return panel_to_json(lp).dump(); })
        .def_static("from_json",
                    [](const std::string& text) { return panel_from_json(json::parse(text)); });

    py::class_<CsvSchema>(m, "CsvSchema")
        .def(py::init<>())
        .def_readwrite("unit_col", &CsvSchema::unit_col)
        .def_readwrite("time_col", &CsvSchema::time_col);
    m.def("ingest_csv", &ingest_csv, py::arg("path"), py::arg("schema") = CsvSchema{},
          "Read a unit/time CSV panel");

    m.def(
        "fit_transform",
        [](const Panel& panel, int k, const std::vector<std::string>& log_columns,
           const std::vector<std::string>& anchors, const std::vector<std::string>& passthrough) {
            auto resolve = [&](const std::vector<std::string>& names) {
                std::vector<int> idx;
                for (const auto& name : names) {
                    const int i = panel.column_index(name);
                    if (i < 0) throw InputError("unknown column '" + name + "'");
                    idx.push_back(i);
                }
                return idx;
            };
            return pca_fit(panel, k, resolve(log_columns), resolve(anchors),
                           resolve(passthrough));
        },
        py::arg("panel"), py::arg("k"), py::arg("log_columns") = std::vector<std::string>{},
        py::arg("anchors") = std::vector<std::string>{},
        py::arg("passthrough") = std::vector<std::string>{},
        "Fit the standardizing projection onto latent coordinates");
    m.def("project", &pca_project, py::arg("transform"), py::arg("panel"));
    m.def(
        "rescale_time",
        [](const LatentPanel& lp, double alpha, int n_sub) {
            LatentPanel out = lp;
            rescale_time(out, {alpha, n_sub});
            return out;
        },
        py::arg("panel"), py::arg("alpha"), py::arg("n_sub") = 1);

    py::class_<PyModel>(m, "Model")
        .def_property_readonly("kind", [](const PyModel& pm) { return pm.kind; })
        .def_property_readonly("dim", [](const PyModel& pm) { return pm.ref().dim(); })
        .def("drift", [](const PyModel& pm, const Vec& x) { return pm.ref().drift(x); })
        .def("diffusion",
             [](const PyModel& pm, const Vec& x) { return mat_to_list(pm.ref().diffusion(x)); })
        .def("to_json", [](const PyModel& pm) { return pm.raw.dump(); })
        .def("epistemic_uncertainty",
             [](const PyModel& pm, const Vec& x) {
                 const auto* ens = dynamic_cast<const lbn::LbnEnsemble*>(&pm.ref());
                 if (!ens) throw InputError("epistemic uncertainty needs an ensemble model");
                 const auto u = ens->epistemic_uncertainty(x);
                 return py::make_tuple(u.value, u.low_signal);
             });

    m.def("load_model", [](const std::string& path) { return wrap_stored(load_model_file(path)); },
          py::arg("path"));
    m.def("model_from_json",
          [](const std::string& text) { return wrap_stored(model_from_json(json::parse(text))); });
    m.def(
        "linear_model",
        [](const std::vector<Vec>& A, const Vec& c, const std::vector<Vec>& D) {
            const LinearSde lin(mat_from_list(A), c, mat_from_list(D));
            return wrap_stored(model_from_json(linear_to_json(lin)));
        },
        py::arg("A"), py::arg("c"), py::arg("D"),
        "Linear drift F(x) = A x + c with constant diffusion D");
    m.def("ou_model", [](int d, double theta, double diff) {
        return wrap_stored(model_from_json(linear_to_json(LinearSde::ou(d, theta, diff))));
    });

    m.def(
        "fit_lbn",
        [](const LatentPanel& lp, const std::vector<int>& widths, double lr, int batch,
           int max_epochs, int k_folds, int n_ens, uint64_t seed, int workers) {
            lbn::LbnHyper hyper;
            if (!widths.empty()) hyper.widths = widths;
            if (lr > 0) hyper.lr = lr;
            if (batch > 0) hyper.batch = batch;
            if (max_epochs > 0) hyper.max_epochs = max_epochs;
            if (k_folds > 0) hyper.k_folds = k_folds;
            if (n_ens > 0) hyper.n_ens = n_ens;
            lbn::LbnTrainLog log;
            auto ens = std::make_shared<lbn::LbnEnsemble>(
                lbn::train_lbn(lbn::km_targets(lp), hyper, seed, workers, &log));
            return PyModel{"lbn", ens, lbn_to_json(*ens, hyper, log)};
        },
        py::arg("panel"), py::arg("widths") = std::vector<int>{}, py::arg("lr") = 0.0,
        py::arg("batch") = 0, py::arg("max_epochs") = 0, py::arg("k_folds") = 0,
        py::arg("n_ens") = 0, py::arg("seed") = 0, py::arg("workers") = 1,
        "Train the drift/diffusion network ensemble on conditional moments");

    m.def(
        "fit_npsde",
        [](const LatentPanel& lp, int grid_per_dim, int S, int iterations, double lr,
           double dt_sim, bool fit_R, uint64_t seed, int workers) {
            npsde::NpsdeConfig cfg;
            if (grid_per_dim > 0) cfg.grid_per_dim = grid_per_dim;
            if (S > 0) cfg.S = S;
            if (iterations > 0) cfg.iterations = iterations;
            if (lr > 0) cfg.lr = lr;
            if (dt_sim > 0) cfg.dt_sim = dt_sim;
            cfg.fit_R = fit_R;
            npsde::FitLog log;
            auto model = std::make_shared<npsde::NpsdeModel>(
                npsde::fit(lp, cfg, RngStream(seed), workers, &log));
            return py::make_tuple(PyModel{"npsde", model, npsde_to_json(*model, log)},
                                  log.objectives);
        },
        py::arg("panel"), py::arg("grid_per_dim") = 0, py::arg("mc_paths") = 0,
        py::arg("iterations") = 0, py::arg("lr") = 0.0, py::arg("dt_sim") = 0.0,
        py::arg("fit_R") = true, py::arg("seed") = 0, py::arg("workers") = 1,
        "Fit the GP collocation estimator by Monte-Carlo likelihood ascent");

    m.def(
        "simulate",
        [](const PyModel& pm, const Vec& x0, const std::vector<double>& times, int n_sub, int S,
           uint64_t seed, int workers) {
            const PathEnsemble ens =
                simulate_ensemble(pm.ref(), x0, times, S, n_sub, RngStream(seed), workers);
            return py::make_tuple(ens.times, ens.paths);
        },
        py::arg("model"), py::arg("x0"), py::arg("times"), py::arg("n_sub") = 1,
        py::arg("paths") = 100, py::arg("seed") = 0, py::arg("workers") = 1,
        "Euler-Maruyama path ensemble; row 0 of every path is x0 at time 0");

    m.def(
        "transition_logdensity",
        [](const PyModel& pm, const Vec& x, const Vec& y, double dt, const std::string& method,
           int n_sub, int kde_samples, uint64_t seed) {
            return transition_logdensity(pm.ref(), x, y, dt,
                                         method_from(method, n_sub, kde_samples, seed));
        },
        py::arg("model"), py::arg("x"), py::arg("y"), py::arg("dt"),
        py::arg("method") = "one_step", py::arg("n_sub") = 1, py::arg("kde_samples") = 200,
        py::arg("seed") = 0);

    m.def(
        "diagnose",
        [](const PyModel& pm, const LatentPanel& lp, const std::string& method, int n_sub, int S,
           uint64_t seed, int workers) {
            const DiagnosticsReport rep = compute_diagnostics(
                pm.ref(), lp, method_from(method, n_sub, S, seed), S, seed, workers);
            py::list records;
            for (const auto& r : rep.records) {
                py::dict d;
                d["unit"] = r.unit;
                d["t_from"] = r.t_from;
                d["t_to"] = r.t_to;
                d["sigma"] = r.sigma;
                d["s"] = r.s;
                d["s_tilde"] = r.s_tilde;
                d["tail_prob"] = r.tail_prob;
                records.append(d);
            }
            py::dict units;
            for (const auto& u : rep.units) units[py::str(u.unit)] = u.Sigma;
            return py::make_tuple(records, units);
        },
        py::arg("model"), py::arg("panel"), py::arg("method") = "one_step", py::arg("n_sub") = 1,
        py::arg("samples") = 1000, py::arg("seed") = 0, py::arg("workers") = 1,
        "Per-transition irreversibility and surprisal scores");

    m.def(
        "impute_gap",
        [](const PyModel& pm, const Vec& x0, double t0, const Vec& xT, double tT,
           const std::vector<double>& queries, int S, int n_sub, const std::string& method,
           uint64_t seed) {
            RngStream rng(seed);
            const auto samples = impute_gap(pm.ref(), x0, t0, xT, tT, queries, S, n_sub,
                                            method_from(method, n_sub, S, seed), rng);
            py::list out;
            for (const auto& s : samples) {
                py::dict d;
                d["time"] = s.query_time;
                d["mean"] = s.mean();
                d["std"] = s.std();
                d["ess"] = s.ess;
                d["low_ess"] = s.low_ess;
                out.append(d);
            }
            return out;
        },
        py::arg("model"), py::arg("x0"), py::arg("t0"), py::arg("xT"), py::arg("tT"),
        py::arg("queries"), py::arg("paths") = 1000, py::arg("n_sub") = 1,
        py::arg("method") = "one_step", py::arg("seed") = 0,
        "Bridge posterior between two observed states");

    m.def(
        "residual_acf",
        [](const PyModel& pm, const LatentPanel& lp, int max_lag) {
            py::list out;
            for (const auto& series : residual_acf(pm.ref(), lp, max_lag)) {
                py::dict d;
                d["acf"] = series.acf;
                d["band"] = series.band;
                d["n"] = series.n;
                out.append(d);
            }
            return out;
        },
        py::arg("model"), py::arg("panel"), py::arg("max_lag") = 20,
        "Standardized one-step residual autocorrelation per dimension");

    m.def("cli_run", [](const std::vector<std::string>& args) { return cli::run(args); },
          py::arg("args"), "Run a command-line subcommand in-process; returns the exit code");
}
