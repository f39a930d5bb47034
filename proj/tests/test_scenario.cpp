#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coeq/errors.hpp"
#include "coeq/rng.hpp"
#include "coeq/scenario.hpp"

using namespace coeq;

TEST_CASE("presets: pinned benchmark coefficients") {
    SUBCASE("dogancay7 tap 4 (1-based)") {
        const ChannelModel ch = preset_channel("dogancay7");
        CHECK(ch.n_tx == 1);
        CHECK(ch.n_rx == 1);
        REQUIRE(ch.taps[0][0].size() == 7);
        CHECK(ch.taps[0][0][3] == cplx(0.634, -0.445));
        CHECK(ch.taps[0][0][0] == cplx(-0.033, 0.014));
    }
    SUBCASE("mimo2x2 h_{2,2}(0) = 1") {
        const ChannelModel ch = preset_channel("mimo2x2");
        CHECK(ch.order() == 2);
        CHECK(ch.taps[1][1][0] == cplx(1.0, 0.0));
        CHECK(ch.taps[0][0][0] == cplx(-0.2, 0.1));
        CHECK(ch.taps[0][1][2] == cplx(0.11, 0.0));
    }
    SUBCASE("mix4x4 entry (1,1)") {
        const ChannelModel ch = preset_channel("mix4x4");
        CHECK(ch.order() == 0);
        CHECK(ch.taps[0][0][0] == cplx(0.41, 0.05));
        CHECK(ch.taps[3][3][0] == cplx(0.57, 0.19));
    }
    SUBCASE("unknown preset lists the known names") {
        try {
            preset_channel("nosuch");
            FAIL("expected InvalidInput");
        } catch (const InvalidInput& e) {
            const std::string msg = e.what();
            CHECK(msg.find("dogancay7") != std::string::npos);
            CHECK(msg.find("mix4x4") != std::string::npos);
        }
    }
    SUBCASE("rayleigh3 draws per seed, unit power per tap") {
        ChannelSpec spec;
        spec.preset = "rayleigh3";
        const ChannelModel a = instantiate_channel(spec, 5);
        const ChannelModel b = instantiate_channel(spec, 5);
        const ChannelModel c = instantiate_channel(spec, 6);
        CHECK(a.taps[0][0] == b.taps[0][0]);
        CHECK(a.taps[0][0] != c.taps[0][0]);
        REQUIRE(a.taps[0][0].size() == 3);
        // ensemble power sanity over many draws: mean |h_i|^2 near 1
        double acc = 0.0;
        const int draws = 400;
        for (int s = 0; s < draws; ++s) {
            const ChannelModel ch = instantiate_channel(spec, 1000 + s);
            for (const cplx& t : ch.taps[0][0]) acc += std::norm(t);
        }
        CHECK(acc / (3.0 * draws) == doctest::Approx(1.0).epsilon(0.15));
    }
}

TEST_CASE("run_scenario: identity channel smoke run") {
    ScenarioConfig cfg;
    cfg.scenario = "smoke";
    cfg.channel.explicit_taps = make_siso_channel({{1.0, 0.0}});
    cfg.constellation = "qpsk";
    cfg.K = 200;
    cfg.L_w = 1;
    cfg.runs = 1;
    cfg.seed = 31;
    cfg.algorithms = {{.name = "co-cma", .post = "pp2"}};
    const ScenarioOutput out = run_scenario(cfg);
    REQUIRE(out.rows.size() == 1);
    CHECK(out.rows[0].ok);
    CHECK(out.rows[0].isi_db <= -60.0);
    CHECK(out.rows[0].ser == 0.0);
    CHECK(out.rows[0].tau.has_value());
}

TEST_CASE("run_scenario: byte-identical reruns and recorded per-run seeds") {
    ScenarioConfig cfg;
    cfg.scenario = "det";
    cfg.channel.preset = "rayleigh3";
    cfg.constellation = "qpsk";
    cfg.K = 150;
    cfg.L_w = 1;
    cfg.runs = 3;
    cfg.seed = 77;
    cfg.algorithms = {{.name = "co-cma", .post = "pp2"}, {.name = "optimal"}};
    cfg.threads = 2;
    const ScenarioOutput a = run_scenario(cfg);
    const ScenarioOutput b = run_scenario(cfg);
    CHECK(csv_string(a.rows) == csv_string(b.rows));
    REQUIRE(a.rows.size() == 6);
    for (int run = 0; run < 3; ++run)
        CHECK(a.rows[2 * run].seed == mix_seed(77, static_cast<std::uint64_t>(run)));
    // rows are ordered by run id then algorithm slot
    CHECK(a.rows[0].run == 0);
    CHECK(a.rows[1].run == 0);
    CHECK(a.rows[2].run == 1);
    // timing column stays empty by default so reruns match byte for byte
    CHECK(csv_string(a.rows).find("wall_ms") != std::string::npos);
}

TEST_CASE("run_scenario: per-run failures are recorded, batch continues") {
    ScenarioConfig cfg;
    cfg.scenario = "failing";
    cfg.channel.explicit_taps = make_siso_channel({{1.0, 0.0}});
    cfg.constellation = "qpsk";
    cfg.K = 100;
    cfg.L_w = 0;
    cfg.runs = 2;
    cfg.algorithms = {{.name = "co-sb-cma", .L_t = 500}};  // pilots beyond the frame
    const ScenarioOutput out = run_scenario(cfg);
    REQUIRE(out.rows.size() == 2);
    CHECK_FALSE(out.rows[0].ok);
    CHECK(out.rows[0].status.find("L_t") != std::string::npos);
    CHECK(out.summaries[0].runs_ok == 0);
}

TEST_CASE("run_scenario: sequential recovery decorrelates the mix4x4 outputs") {
    ScenarioConfig cfg;
    cfg.scenario = "mix-decorrelation";
    cfg.channel.preset = "mix4x4";
    cfg.constellation = "qpsk";
    cfg.K = 500;
    cfg.snr_db = 10.0;
    cfg.L_w = 0;
    cfg.runs = 1;
    cfg.seed = 321;
    cfg.lambda_cr = 1.0;
    cfg.delta = 0;
    const AlgorithmSpec alg{.name = "co-cma", .post = "pp2"};
    const RunArtifacts art = run_one(cfg, alg, 0);
    REQUIRE(art.row.ok);
    // pairwise output cross-correlations small compared to the source power
    std::vector<VectorXc> y;
    for (int i = 0; i < 4; ++i)
        y.push_back(equalizer_output(art.frame, stacked_equalizer(art.bank, i), 0));
    const double sigma_s2 = 1.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            cplx acc = 0.0;
            for (int k = 0; k < y[i].size(); ++k) acc += y[i][k] * std::conj(y[j][k]);
            CHECK(std::abs(acc / static_cast<double>(y[i].size())) <= 0.2 * sigma_s2);
        }
}

TEST_CASE("config: parse, defaults, and nested keys") {
    const std::string text = R"json({
        "scenario": "parse-check",
        "channel": {"preset": "dogancay7"},
        "constellation": "16qam",
        "K": 321,
        "snr_db": 14,
        "L_w": 5,
        "runs": 7,
        "seed": 99,
        "algorithms": [
            {"name": "co-cma", "post": "pp1"},
            {"name": "co-sb-cma", "lambda": 0.25, "L_t": 6},
            {"name": "bgd-cma", "step": 0.001, "spike_pos": 2},
            "optimal"
        ],
        "solver": {"eps_gap": 1e-8, "max_iters": 12345},
        "extraction": {"gamma": 1e-6}
    })json";
    const ScenarioConfig cfg = parse_config(text);
    CHECK(cfg.scenario == "parse-check");
    CHECK(cfg.channel.preset == "dogancay7");
    CHECK(cfg.constellation == "16qam");
    CHECK(cfg.K == 321);
    CHECK(cfg.snr_db == 14.0);
    CHECK(cfg.runs == 7);
    CHECK(cfg.seed == 99);
    REQUIRE(cfg.algorithms.size() == 4);
    CHECK(cfg.algorithms[0].post == "pp1");
    CHECK(cfg.algorithms[1].lambda == 0.25);
    CHECK(cfg.algorithms[1].L_t == 6);
    CHECK(cfg.algorithms[2].step == 0.001);
    CHECK(cfg.algorithms[2].spike_pos == 2);
    CHECK(cfg.algorithms[3].name == "optimal");
    CHECK(cfg.solver.eps_gap == 1e-8);
    CHECK(cfg.solver.max_iters == 12345);
    CHECK(cfg.extraction.gamma == 1e-6);

    const ScenarioConfig inf_cfg = parse_config(R"({"snr_db": "inf"})");
    CHECK(std::isinf(inf_cfg.snr_db));

    CHECK_THROWS_AS(parse_config(R"({"snr_db": "loud"})"), InvalidInput);
}

TEST_CASE("config: explicit taps") {
    const std::string text = R"json({
        "channel": {"taps": [[[[0.5, 0.0], [0.0, -0.25]]]]},
        "K": 64, "L_w": 0
    })json";
    const ScenarioConfig cfg = parse_config(text);
    REQUIRE(cfg.channel.explicit_taps.has_value());
    CHECK(cfg.channel.explicit_taps->taps[0][0][1] == cplx(0.0, -0.25));
}

TEST_CASE("csv: fixed column order and empty optionals") {
    ResultRow r;
    r.run = 0;
    r.scenario = "s";
    r.algorithm = "optimal";
    r.snr_db = std::numeric_limits<double>::infinity();
    r.K = 10;
    r.isi_db = -12.5;
    r.ser = 0.0;
    r.f_u = 0.0;
    r.seed = 42;
    const std::string csv = csv_string({r});
    CHECK(csv.find("run,scenario,algorithm,snr_db,K,isi_db,ncci_db,ser,tau,f_u,"
                   "solver_iters,extract_iters,wall_ms,seed,status") == 0);
    CHECK(csv.find("0,s,optimal,inf,10,-12.5,,0,,0,0,0,,42,ok") != std::string::npos);
}

TEST_CASE("summary json: aggregates carried through") {
    ScenarioConfig cfg;
    cfg.scenario = "json-check";
    cfg.channel.explicit_taps = make_siso_channel({{1.0, 0.0}});
    cfg.constellation = "qpsk";
    cfg.K = 150;
    cfg.L_w = 1;
    cfg.runs = 2;
    cfg.algorithms = {{.name = "optimal"}};
    const ScenarioOutput out = run_scenario(cfg);
    std::ostringstream os;
    write_summary_json(cfg, out, os);
    const std::string js = os.str();
    CHECK(js.find("\"scenario\": \"json-check\"") != std::string::npos);
    CHECK(js.find("mean_isi_db") != std::string::npos);
    CHECK(js.find("stderr_isi_db") != std::string::npos);
}
