#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "coeq/acceptance.hpp"
#include "coeq/rng.hpp"
#include "coeq/scenario.hpp"
#include "coeq/selfcheck.hpp"

namespace {

std::string summary_path(const std::string& csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() > suffix.size() &&
        csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return csv_path.substr(0, csv_path.size() - suffix.size()) + ".json";
    return csv_path + ".json";
}

int cmd_run(const std::string& config_path, double* snr, int* runs, long long* seed,
            const std::string& out_path, bool timing, int threads) {
    coeq::ScenarioConfig cfg = coeq::load_config(config_path);
    if (snr) cfg.snr_db = *snr;
    if (runs) cfg.runs = *runs;
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (threads > 0) cfg.threads = threads;

    const coeq::ScenarioOutput out = coeq::run_scenario(cfg);

    std::ofstream csv(out_path);
    if (!csv) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }
    coeq::write_csv(out.rows, csv, timing);
    std::string js_path = summary_path(out_path);
    if (js_path == config_path) js_path = out_path + ".summary.json";  // keep the config
    std::ofstream js(js_path);
    coeq::write_summary_json(cfg, out, js);

    int failures = 0;
    for (const auto& r : out.rows)
        if (!r.ok) ++failures;
    std::cout << "scenario " << cfg.scenario << ": " << out.rows.size() << " rows ("
              << failures << " failed) -> " << out_path << "\n";
    for (const auto& s : out.summaries) {
        std::cout << "  " << s.algorithm << ": mean ISI " << s.mean_isi_db << " dB (+/- "
                  << s.stderr_isi_db << ")";
        if (s.mean_ncci_db) std::cout << ", mean NCCI " << *s.mean_ncci_db << " dB";
        std::cout << ", mean SER " << s.mean_ser << "\n";
    }
    return failures == 0 ? 0 : 2;
}

int cmd_preset_list() {
    for (const auto& name : coeq::preset_names())
        std::cout << name << "  -  " << coeq::preset_description(name) << "\n";
    return 0;
}

int cmd_verify(bool with_acceptance) {
    int failed = 0;
    for (const auto& c : coeq::run_selfchecks()) {
        std::cout << (c.pass ? "[pass] " : "[FAIL] ") << c.name << "  (" << c.detail << ")\n";
        if (!c.pass) ++failed;
    }
    if (with_acceptance) {
        for (const auto& c : coeq::run_acceptance(&std::cout)) {
            std::cout << (c.pass ? "[pass] " : "[FAIL] ") << "criterion " << c.id << " "
                      << c.name << "  (" << c.detail << ")\n";
            if (!c.pass) ++failed;
        }
    }
    std::cout << (failed == 0 ? "verify: all checks passed\n"
                              : "verify: " + std::to_string(failed) + " check(s) failed\n");
    return failed == 0 ? 0 : 1;
}

int cmd_export_sdp(const std::string& config_path, const std::string& out_path) {
    const coeq::ScenarioConfig cfg = coeq::load_config(config_path);
    coeq::AlgorithmSpec alg;
    for (const auto& a : cfg.algorithms)
        if (a.name.rfind("co-", 0) == 0) {
            alg = a;
            break;
        }
    // Assemble the first run's stream-0 blind problem.
    const coeq::ChannelModel ch =
        coeq::instantiate_channel(cfg.channel, coeq::mix_seed(coeq::mix_seed(cfg.seed, 0), 0xc));
    const coeq::Constellation cst = coeq::make_constellation(cfg.constellation);
    const coeq::ConstellationStats stats = coeq::constellation_stats(cst);
    const coeq::SignalFrame frame = coeq::generate_frame(
        cst, ch, cfg.K, cfg.snr_db, coeq::mix_seed(coeq::mix_seed(cfg.seed, 0), 0xf));
    const coeq::MomentModel moments = coeq::estimate_moments(frame, cfg.L_w);
    coeq::CostCoefficients cost;
    if (alg.name == "co-swa")
        cost = coeq::swa_cost(moments, stats.sigma_s2, stats.kurtosis, alg.alpha);
    else if (alg.name == "co-med")
        cost = coeq::med_cost(moments, stats.sigma_s2, alg.lambda_p);
    else
        cost = coeq::cma_cost(moments, stats.R2);
    const coeq::SosSdpProblem problem = coeq::assemble(cost);
    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }
    coeq::export_problem(problem, out);
    std::cout << "exported " << problem.equalities.size() << " equalities, Gram dim "
              << problem.gram_dim << " -> " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coeq: blind/semiblind equalization via convex relaxation"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    std::string config_path, out_path = "results.csv";
    double snr_override = 0.0;
    int runs_override = 0, threads = 0;
    long long seed_override = 0;
    bool timing = false;
    run->add_option("--config", config_path, "scenario config (json)")->required();
    auto* snr_opt = run->add_option("--snr", snr_override, "override snr_db");
    auto* runs_opt = run->add_option("--runs", runs_override, "override Monte Carlo runs");
    auto* seed_opt = run->add_option("--seed", seed_override, "override base seed");
    run->add_option("--out", out_path, "output csv path")->required();
    run->add_option("--threads", threads, "worker threads (0 = auto)");
    run->add_flag("--timing", timing,
                  "include wall-clock times in the csv (reruns then differ)");

    // preset
    auto* preset = app.add_subcommand("preset", "channel preset utilities");
    std::string preset_action = "list";
    preset->add_option("action", preset_action, "list")->check(CLI::IsMember({"list"}));

    // verify
    auto* verify = app.add_subcommand("verify", "run the property suites");
    bool with_acceptance = false;
    verify->add_flag("--acceptance", with_acceptance,
                     "also run the full benchmark suite (minutes)");

    // export-sdp
    auto* exp = app.add_subcommand("export-sdp", "export an assembled problem as text");
    std::string exp_config, exp_out = "problem.sdp.txt";
    exp->add_option("--config", exp_config, "scenario config (json)")->required();
    exp->add_option("--out", exp_out, "output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, snr_opt->count() ? &snr_override : nullptr,
                           runs_opt->count() ? &runs_override : nullptr,
                           seed_opt->count() ? &seed_override : nullptr, out_path, timing,
                           threads);
        if (preset->parsed()) return cmd_preset_list();
        if (verify->parsed()) return cmd_verify(with_acceptance);
        if (exp->parsed()) return cmd_export_sdp(exp_config, exp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
