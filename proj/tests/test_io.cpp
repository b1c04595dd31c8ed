#include <doctest.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "panelsde/model_io.hpp"

using namespace panelsde;
using panelsde::testing::TempDir;
using panelsde::testing::make_ou_panel;

TEST_CASE("vectors and matrices survive a json round trip bit for bit") {
    const Vec v{0.1, -3.5e300, 5e-324, 0.0, 1.0 / 3.0};
    CHECK(vec_from_json(vec_to_json(v)) == v);

    Mat m(2, 3);
    m(0, 0) = 0.1 + 0.2;  // 0.30000000000000004, shortest-round-trip sensitive
    m(0, 1) = -1e-17;
    m(0, 2) = 2.0;
    m(1, 0) = 1e17;
    m(1, 1) = -0.0;
    m(1, 2) = std::nextafter(1.0, 2.0);
    const Mat back = mat_from_json(mat_to_json(m));
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) CHECK(back(i, j) == m(i, j));

    CHECK_THROWS_AS(mat_from_json(json::parse("[[1.0, 2.0], [3.0]]")), SchemaError);
}

TEST_CASE("panel json round trip preserves states, gaps, and rescaling") {
    LatentPanel lp = make_ou_panel(3, 7, 0.25, 1.0, 0.5, 5);
    lp.rescaling.alpha = 2.5;
    lp.rescaling.n_sub = 4;
    GapSpan g;
    g.unit = lp.units[1].id;
    g.t_start = 0.25;
    g.t_end = 1.0;
    g.missing_times = {0.5, 0.75};
    lp.gaps.push_back(g);

    const json j = panel_to_json(lp);
    CHECK(j.at("kind") == "latent_panel");
    const LatentPanel back = panel_from_json(j);
    CHECK(back.state_names == lp.state_names);
    CHECK(back.rescaling.alpha == 2.5);
    CHECK(back.rescaling.n_sub == 4);
    REQUIRE(back.units.size() == 3);
    for (size_t u = 0; u < 3; ++u) {
        CHECK(back.units[u].id == lp.units[u].id);
        CHECK(back.units[u].times == lp.units[u].times);
        CHECK(back.units[u].states == lp.units[u].states);
    }
    REQUIRE(back.gaps.size() == 1);
    CHECK(back.gaps[0].unit == g.unit);
    CHECK(back.gaps[0].missing_times == g.missing_times);

    // Serialization is canonical: dumping the reparsed panel reproduces the
    // original byte stream.
    CHECK(panel_to_json(back).dump() == j.dump());
}

TEST_CASE("panel json carries the fitted column transform") {
    Panel raw;
    raw.columns = {"a", "b"};
    PanelUnit pu;
    pu.id = "u0";
    RngStream rng(3);
    for (int i = 0; i < 40; ++i) {
        const double z = rng.normal();
        pu.obs.push_back({static_cast<double>(i), {z, 0.5 * z + 0.1 * rng.normal()}});
    }
    raw.units.push_back(pu);
    const PcaModel pca = pca_fit(raw, 2);
    const LatentPanel lp = pca_project(pca, raw);

    const json j = panel_to_json(lp, &pca);
    PcaModel pca_back;
    const LatentPanel back = panel_from_json(j, &pca_back);
    CHECK(pca_back.columns == pca.columns);
    CHECK(pca_back.column_means == pca.column_means);
    CHECK(pca_back.column_stds == pca.column_stds);
    CHECK(pca_back.explained_variance_ratio == pca.explained_variance_ratio);
    CHECK(pca_back.sign_anchors == pca.sign_anchors);
    for (int i = 0; i < pca.k(); ++i)
        for (int j2 = 0; j2 < pca.p(); ++j2)
            CHECK(pca_back.components(i, j2) == pca.components(i, j2));
    CHECK(back.units[0].states == lp.units[0].states);
}

TEST_CASE("panel json validation") {
    json j = panel_to_json(make_ou_panel(1, 3, 0.5, 1.0, 0.5, 1));
    j["kind"] = "something_else";
    CHECK_THROWS_AS(panel_from_json(j), SchemaError);

    json missing = panel_to_json(make_ou_panel(1, 3, 0.5, 1.0, 0.5, 1));
    missing.erase("units");
    CHECK_THROWS_WITH_AS(panel_from_json(missing), doctest::Contains("units"), SchemaError);

    json ragged = panel_to_json(make_ou_panel(1, 3, 0.5, 1.0, 0.5, 1));
    ragged["units"][0]["times"].push_back(9.0);
    CHECK_THROWS_AS(panel_from_json(ragged), SchemaError);
}

TEST_CASE("linear model json round trip") {
    const LinearSde ou = LinearSde::ou(2, 0.7, 0.3);
    const json j = linear_to_json(ou);
    const LinearSde back = linear_from_json(j);
    CHECK(back.dim() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(back.A()(i, i) == -0.7);
        CHECK(back.D()(i, i) == 0.3);
        CHECK(back.c()[i] == 0.0);
    }
    const Vec x{0.4, -1.0};
    CHECK(back.drift(x) == ou.drift(x));
}

TEST_CASE("lbn ensemble json round trip is exact") {
    using namespace panelsde::lbn;
    const LatentPanel lp = make_ou_panel(4, 30, 0.2, 1.0, 0.5, 9);
    LbnHyper hyper;
    hyper.widths = {6};
    hyper.max_epochs = 8;
    hyper.k_folds = 2;
    hyper.n_ens = 4;
    LbnTrainLog log;
    const LbnEnsemble ens = train_lbn(km_targets(lp), hyper, 3, 1, &log);

    const json j = lbn_to_json(ens, hyper, log);
    CHECK(j.at("kind") == "lbn");
    const LbnEnsemble back = lbn_from_json(j);
    REQUIRE(back.members().size() == ens.members().size());
    for (size_t m = 0; m < ens.members().size(); ++m) {
        CHECK(back.members()[m].drift == ens.members()[m].drift);
        CHECK(back.members()[m].diff == ens.members()[m].diff);
    }
    CHECK(back.drift_net().hidden() == std::vector<int>{6});
    const Vec x{0.3};
    CHECK(back.drift(x) == ens.drift(x));
    CHECK(back.diffusion(x)(0, 0) == ens.diffusion(x)(0, 0));

    json corrupt = j;
    corrupt["members"][0]["drift"] = "AAAAAAAAAAA=";  // one double, wrong count
    CHECK_THROWS_AS(lbn_from_json(corrupt), SchemaError);
    corrupt["members"][0]["drift"] = "////";  // not a whole number of doubles
    CHECK_THROWS_AS(lbn_from_json(corrupt), ParseError);
    json empty = j;
    empty["members"] = json::array();
    CHECK_THROWS_AS(lbn_from_json(empty), SchemaError);
}

TEST_CASE("npsde model json round trip is exact") {
    using namespace panelsde::npsde;
    LatentPanel lp = make_ou_panel(3, 8, 0.3, 1.0, 0.5, 13);
    NpsdeConfig cfg;
    cfg.grid_per_dim = 4;
    cfg.S = 8;
    cfg.iterations = 4;
    FitLog log;
    const NpsdeModel model = fit(lp, cfg, RngStream(5), 1, &log);

    const json j = npsde_to_json(model, log);
    CHECK(j.at("kind") == "npsde");
    const NpsdeModel back = npsde_from_json(j);
    CHECK(back.params() == model.params());
    CHECK(back.dt_sim() == model.dt_sim());
    CHECK(back.restart_factor() == model.restart_factor());
    CHECK(back.jitter() == model.jitter());
    const Vec x{0.2};
    CHECK(back.drift(x) == model.drift(x));
    CHECK(back.diffusion(x)(0, 0) == model.diffusion(x)(0, 0));

    json bad = j;
    bad["u_f"] = json::array({json::array({1.0})});
    CHECK_THROWS_AS(npsde_from_json(bad), SchemaError);
}

TEST_CASE("stored model dispatch and file loading") {
    const LinearSde ou = LinearSde::ou(1, 0.5, 0.5);
    const StoredModel sm = model_from_json(linear_to_json(ou));
    CHECK(sm.kind == "linear");
    CHECK(sm.model->drift({1.0})[0] == doctest::Approx(-0.5).epsilon(1e-14));

    json unknown;
    unknown["kind"] = "mystery";
    CHECK_THROWS_WITH_AS(model_from_json(unknown), doctest::Contains("mystery"), SchemaError);

    TempDir dir("io");
    {
        std::ofstream out(dir.str("model.json"));
        out << linear_to_json(ou).dump(2) << "\n";
    }
    const StoredModel loaded = load_model_file(dir.str("model.json"));
    CHECK(loaded.kind == "linear");

    CHECK_THROWS_AS(load_model_file(dir.str("nope.json")), ParseError);
    {
        std::ofstream out(dir.str("broken.json"));
        out << "{not json";
    }
    CHECK_THROWS_AS(load_json_file(dir.str("broken.json")), ParseError);
    {
        std::ofstream out(dir.str("wrong.json"));
        out << "{\"kind\": 7}\n";
    }
    CHECK_THROWS_AS(load_model_file(dir.str("wrong.json")), SchemaError);
}
