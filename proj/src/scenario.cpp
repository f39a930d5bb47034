#include "coeq/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "coeq/baselines.hpp"
#include "coeq/errors.hpp"
#include "coeq/metrics.hpp"
#include "coeq/rng.hpp"

namespace coeq {

namespace {

ChannelModel dogancay7() {
    return make_siso_channel({{-0.033, 0.014},
                              {0.085, -0.039},
                              {-0.232, 0.136},
                              {0.634, -0.445},
                              {0.07, -0.233},
                              {-0.027, -0.071},
                              {-0.023, -0.012}});
}

ChannelModel mimo2x2() {
    ChannelModel ch;
    ch.n_tx = 2;
    ch.n_rx = 2;
    ch.taps = {
        {{{-0.2, 0.1}, {1.0, 0.0}, {0.0, 0.2}},   // h_{1,1}
         {{0.0, 0.1}, {0.2, 0.0}, {0.11, 0.0}}},  // h_{1,2}
        {{{0.0, 0.1}, {0.1, 0.0}, {0.0, 0.2}},    // h_{2,1}
         {{1.0, 0.0}, {0.0, 0.1}, {0.1, 0.1}}},   // h_{2,2}
    };
    validate_channel(ch);
    return ch;
}

ChannelModel mix4x4() {
    ChannelModel ch;
    ch.n_tx = 4;
    ch.n_rx = 4;
    const cplx H[4][4] = {
        {{0.41, 0.05}, {0.45, 0.62}, {0.26, 0.92}, {-0.25, -0.61}},
        {{0.52, -1.11}, {1.04, -0.12}, {0.06, 0.66}, {-0.81, 0.21}},
        {{0.07, -0.80}, {1.30, 0.33}, {1.40, 0.65}, {-0.05, 0.94}},
        {{0.47, -1.08}, {0.83, 0.43}, {0.94, -0.08}, {0.57, 0.19}},
    };
    ch.taps.resize(4);
    for (int j = 0; j < 4; ++j) {
        ch.taps[j].resize(4);
        for (int n = 0; n < 4; ++n) ch.taps[j][n] = {H[j][n]};
    }
    validate_channel(ch);
    return ch;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"dogancay7", "mimo2x2", "mix4x4", "rayleigh3"};
}

std::string preset_description(const std::string& name) {
    if (name == "dogancay7") return "fixed 7-tap complex SISO channel";
    if (name == "mimo2x2") return "fixed 2x2 FIR channel, 3 taps per sub-channel";
    if (name == "mix4x4") return "fixed 4x4 instantaneous mixing matrix";
    if (name == "rayleigh3") return "random ensemble: 3-tap SISO Rayleigh, unit power per tap";
    return "";
}

ChannelModel preset_channel(const std::string& name) {
    if (name == "dogancay7") return dogancay7();
    if (name == "mimo2x2") return mimo2x2();
    if (name == "mix4x4") return mix4x4();
    std::string msg = "unknown channel preset '" + name + "'; known presets:";
    for (const auto& p : preset_names()) msg += " " + p;
    throw InvalidInput(msg);
}

ChannelModel instantiate_channel(const ChannelSpec& spec, std::uint64_t seed) {
    if (spec.explicit_taps) {
        validate_channel(*spec.explicit_taps);
        return *spec.explicit_taps;
    }
    if (spec.preset == "rayleigh3" || spec.preset == "rayleigh") {
        Rng rng(seed);
        const int taps = spec.rayleigh_taps;
        const double tap_var = spec.rayleigh_total_power ? 1.0 / taps : 1.0;
        const double s = std::sqrt(tap_var / 2.0);
        std::vector<cplx> h(taps);
        for (auto& t : h) t = cplx(s * rng.gaussian(), s * rng.gaussian());
        return make_siso_channel(h);
    }
    return preset_channel(spec.preset);
}

namespace {

struct StreamResult {
    VectorXc w;
    double tau_sum = 0.0;
    double f_sum = 0.0;
    int tau_count = 0;
    int solver_iters = 0;
    int extract_iters = 0;
};

MatrixXd relaxed_null_space(const MatrixXd& G, double gamma) {
    // An overly tight threshold can miss the certificate when solver noise
    // sits right at gamma; widen a few decades before giving up.
    for (double g = gamma; g <= 1e-2; g *= 10.0) {
        try {
            return null_space_basis(G, g);
        } catch (const ExtractionError&) {
        }
    }
    return null_space_basis(G, 1e-1);
}

CostCoefficients build_blind_cost(const AlgorithmSpec& alg, const MomentModel& moments,
                                  const ConstellationStats& stats) {
    if (alg.name == "co-swa") return swa_cost(moments, stats.sigma_s2, stats.kurtosis, alg.alpha);
    if (alg.name == "co-med") return med_cost(moments, stats.sigma_s2, alg.lambda_p);
    return cma_cost(moments, stats.R2);  // cma variants and all bgd blind costs
}

bool is_semiblind(const AlgorithmSpec& alg) {
    return alg.name == "co-sb-cma" || alg.name == "bgd-sb-cma";
}

bool is_co(const AlgorithmSpec& alg) { return alg.name.rfind("co-", 0) == 0; }

// Per-run, per-algorithm pipeline. Sequential multi-stream recovery: each
// stream adds the cross-correlation penalty of the already-extracted ones.
ResultRow run_algorithm(const ScenarioConfig& cfg, const AlgorithmSpec& alg,
                        const ChannelModel& ch, const SignalFrame& frame,
                        const MomentModel& moments, const ConstellationStats& stats,
                        const Constellation& constellation, int run,
                        std::uint64_t run_seed, EqualizerBank* bank_out = nullptr) {
    ResultRow row;
    row.run = run;
    row.scenario = cfg.scenario;
    row.algorithm = alg.name + (is_co(alg) && alg.name != "optimal" ? "(" + alg.post + ")" : "");
    row.snr_db = cfg.snr_db;
    row.K = cfg.K;
    row.seed = run_seed;

    const auto t0 = std::chrono::steady_clock::now();
    const int L_w = cfg.L_w;
    const int L_h = ch.order();
    const int n_streams = ch.n_tx;

    EqualizerBank bank;
    bank.n_streams = n_streams;
    bank.n_rx = ch.n_rx;
    bank.order = L_w;
    bank.coeffs.resize(n_streams);

    double tau_sum = 0.0, f_sum = 0.0;
    int tau_count = 0, solver_iters = 0, extract_iters = 0;

    if (alg.name == "optimal") {
        bank = optimal_linear_equalizer(ch, L_w, cfg.snr_db);
    } else {
        std::vector<VectorXc> prev;
        ExtractionSettings ext = cfg.extraction;
        ext.init_seed = mix_seed(run_seed, 0xe);
        for (int stream = 0; stream < n_streams; ++stream) {
            CostCoefficients cost = build_blind_cost(alg, moments, stats);
            if (is_semiblind(alg)) {
                // Pilot prefix of this stream's own source sequence; the
                // decision delay comes from the blind solution's pilot
                // correlation, searched over 0..L_h+L_w.
                if (alg.L_t < 1 || alg.L_t > cfg.K)
                    throw InvalidInput("semiblind: L_t outside the frame");
                std::vector<cplx> pilots(alg.L_t);
                for (int t = 0; t < alg.L_t; ++t) pilots[t] = frame.sources(stream, t);
                VectorXc w_blind;
                if (is_co(alg)) {
                    const SosSdpProblem blind_problem = assemble(cost);
                    const SdpSolution bs = solve(blind_problem, cfg.solver);
                    solver_iters += bs.iters;
                    const MatrixXd V = relaxed_null_space(bs.G, ext.gamma);
                    const ExtractionResult er =
                        extract_pp2(V, moments.b, stats.sigma_s2, ext);
                    w_blind = u_to_equalizer(er.u);
                } else {
                    BgdSettings bgd;
                    bgd.step = alg.step;
                    bgd.max_iters = alg.bgd_iters;
                    VectorXd u0 = VectorXd::Zero(moments.n2);
                    const int spike =
                        alg.spike_pos >= 0 ? alg.spike_pos
                                           : stream * (L_w + 1) + L_w / 2;
                    u0[spike] = 1.0;
                    w_blind = u_to_equalizer(run_bgd(cost, u0, bgd).u);
                }
                const int d = select_delay(frame, L_w, pilots, w_blind, L_h + L_w);
                const CostCoefficients jt = training_cost(frame, L_w, pilots, d);
                cost = combine({{cost, alg.lambda}, {jt, 1.0 - alg.lambda}});
            }
            if (!prev.empty()) {
                const VectorXd q = cross_corr_penalty(prev, frame, L_w, cfg.delta);
                cost = combine({{cost, 1.0}, {penalty_cost(q), cfg.lambda_cr}});
            }

            VectorXd u;
            if (is_co(alg)) {
                const SosSdpProblem problem = assemble(cost);
                const SdpSolution sol = solve(problem, cfg.solver);
                solver_iters += sol.iters;
                tau_sum += sol.tau;
                ++tau_count;
                const MatrixXd V = relaxed_null_space(sol.G, ext.gamma);
                ExtractionResult er;
                if (alg.post == "pp1")
                    er = extract_pp1(V, ext);
                else
                    er = extract_pp2(V, moments.b, stats.sigma_s2, ext);
                extract_iters += er.iters;
                u = er.u;
            } else {
                BgdSettings bgd;
                bgd.step = alg.step;
                bgd.max_iters = alg.bgd_iters;
                VectorXd u0 = VectorXd::Zero(moments.n2);
                const int spike = alg.spike_pos >= 0 ? alg.spike_pos
                                                     : stream * (L_w + 1) + L_w / 2;
                if (spike >= moments.n2) throw InvalidInput("bgd: spike position out of range");
                u0[spike] = 1.0;
                const BgdResult br = run_bgd(cost, u0, bgd);
                solver_iters += br.iters;
                u = br.u;
            }
            f_sum += evaluate_cost_best_scale(cost, u);
            const VectorXc w = u_to_equalizer(u);
            prev.push_back(w);
            bank.coeffs[stream] = equalizer_from_stacked(w, ch.n_rx, L_w).coeffs[0];
        }
    }

    // Metrics over all streams of the bank.
    const CombinedResponse cr = combined_response(ch, bank);
    double isi_db_sum = 0.0, ser_sum = 0.0;
    for (int i = 0; i < n_streams; ++i) {
        isi_db_sum += to_db(isi_linear(cr, i));
        const VectorXc y = equalizer_output(frame, stacked_equalizer(bank, i), L_w);
        ser_sum += ser(y, L_w, frame, constellation, cr, i);
    }
    row.isi_db = isi_db_sum / n_streams;
    row.ser = ser_sum / n_streams;
    if (L_h == 0 && L_w == 0 && ch.n_tx > 1)
        row.ncci_db = to_db(average_ncci_linear(combined_matrix(cr)));
    if (tau_count > 0) row.tau = tau_sum / tau_count;
    row.f_u = f_sum / std::max(1, n_streams);
    row.solver_iters = solver_iters;
    row.extract_iters = extract_iters;
    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    if (bank_out) *bank_out = bank;
    return row;
}

ResultRow failed_row(const ScenarioConfig& cfg, const AlgorithmSpec& alg, int run,
                     std::uint64_t run_seed, const std::string& what) {
    ResultRow row;
    row.run = run;
    row.scenario = cfg.scenario;
    row.algorithm = alg.name;
    row.snr_db = cfg.snr_db;
    row.K = cfg.K;
    row.seed = run_seed;
    row.ok = false;
    row.status = what;
    return row;
}

}  // namespace

RunArtifacts run_one(const ScenarioConfig& config, const AlgorithmSpec& alg, int run) {
    const Constellation constellation = make_constellation(config.constellation);
    const ConstellationStats stats = constellation_stats(constellation);
    RunArtifacts art;
    const std::uint64_t run_seed = mix_seed(config.seed, static_cast<std::uint64_t>(run));
    art.channel = instantiate_channel(config.channel, mix_seed(run_seed, 0xc));
    art.frame = generate_frame(constellation, art.channel, config.K, config.snr_db,
                               mix_seed(run_seed, 0xf));
    MomentModel moments;
    if (alg.name != "optimal") moments = estimate_moments(art.frame, config.L_w);
    art.row = run_algorithm(config, alg, art.channel, art.frame, moments, stats,
                            constellation, run, run_seed, &art.bank);
    return art;
}

ScenarioOutput run_scenario(const ScenarioConfig& config) {
    if (config.runs < 1) throw InvalidInput("run_scenario: runs must be >= 1");
    if (config.algorithms.empty()) throw InvalidInput("run_scenario: no algorithms");
    const Constellation constellation = make_constellation(config.constellation);
    const ConstellationStats stats = constellation_stats(constellation);
    const int n_alg = static_cast<int>(config.algorithms.size());

    ScenarioOutput out;
    out.rows.resize(static_cast<std::size_t>(config.runs) * n_alg);

    auto worker = [&](int run) {
        const std::uint64_t run_seed = mix_seed(config.seed, static_cast<std::uint64_t>(run));
        ChannelModel ch;
        SignalFrame frame;
        MomentModel moments;
        bool prepared = false;
        std::string prep_error;
        try {
            ch = instantiate_channel(config.channel, mix_seed(run_seed, 0xc));
            frame = generate_frame(constellation, ch, config.K, config.snr_db,
                                   mix_seed(run_seed, 0xf));
            bool need_moments = false;
            for (const auto& a : config.algorithms)
                if (a.name != "optimal") need_moments = true;
            if (need_moments) moments = estimate_moments(frame, config.L_w);
            prepared = true;
        } catch (const std::exception& e) {
            prep_error = e.what();
        }
        for (int a = 0; a < n_alg; ++a) {
            const std::size_t slot = static_cast<std::size_t>(run) * n_alg + a;
            if (!prepared) {
                out.rows[slot] = failed_row(config, config.algorithms[a], run, run_seed,
                                            prep_error);
                continue;
            }
            try {
                out.rows[slot] = run_algorithm(config, config.algorithms[a], ch, frame,
                                               moments, stats, constellation, run, run_seed);
            } catch (const std::exception& e) {
                out.rows[slot] =
                    failed_row(config, config.algorithms[a], run, run_seed, e.what());
            }
        }
    };

    int threads = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, config.runs));
    if (threads == 1) {
        for (int run = 0; run < config.runs; ++run) worker(run);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (int run = next.fetch_add(1); run < config.runs; run = next.fetch_add(1))
                    worker(run);
            });
        for (auto& th : pool) th.join();
    }

    // Aggregates per algorithm, dB-domain mean and standard error.
    for (int a = 0; a < n_alg; ++a) {
        AlgorithmSummary s;
        s.algorithm = out.rows[a].algorithm;
        std::vector<double> isi_dbs, ncci_dbs, taus;
        double lin_sum = 0.0;
        for (int run = 0; run < config.runs; ++run) {
            const ResultRow& r = out.rows[static_cast<std::size_t>(run) * n_alg + a];
            if (r.ok) s.algorithm = r.algorithm;
            if (!r.ok) continue;
            ++s.runs_ok;
            isi_dbs.push_back(r.isi_db);
            lin_sum += from_db(r.isi_db);
            if (r.ncci_db) ncci_dbs.push_back(*r.ncci_db);
            if (r.tau) taus.push_back(*r.tau);
            s.mean_ser += r.ser;
            s.mean_f_u += r.f_u;
            s.mean_wall_ms += r.wall_ms;
        }
        if (s.runs_ok > 0) {
            double mean = 0.0;
            for (double v : isi_dbs) mean += v;
            mean /= s.runs_ok;
            double var = 0.0;
            for (double v : isi_dbs) var += (v - mean) * (v - mean);
            s.mean_isi_db = mean;
            s.stderr_isi_db =
                s.runs_ok > 1 ? std::sqrt(var / (s.runs_ok - 1) / s.runs_ok) : 0.0;
            s.isi_db_of_mean = to_db(lin_sum / s.runs_ok);
            s.mean_ser /= s.runs_ok;
            s.mean_f_u /= s.runs_ok;
            s.mean_wall_ms /= s.runs_ok;
            if (!ncci_dbs.empty()) {
                double m = 0.0;
                for (double v : ncci_dbs) m += v;
                s.mean_ncci_db = m / static_cast<double>(ncci_dbs.size());
            }
            if (!taus.empty()) {
                double m = 0.0;
                for (double v : taus) m += v;
                s.mean_tau = m / static_cast<double>(taus.size());
            }
        }
        out.summaries.push_back(std::move(s));
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os, bool include_timing) {
    os << "run,scenario,algorithm,snr_db,K,isi_db,ncci_db,ser,tau,f_u,"
          "solver_iters,extract_iters,wall_ms,seed,status\n";
    for (const ResultRow& r : rows) {
        os << r.run << ',' << r.scenario << ',' << r.algorithm << ','
           << (std::isfinite(r.snr_db) ? fmt(r.snr_db) : "inf") << ',' << r.K << ',';
        if (r.ok) {
            os << fmt(r.isi_db) << ',' << (r.ncci_db ? fmt(*r.ncci_db) : "") << ','
               << fmt(r.ser) << ',' << (r.tau ? fmt(*r.tau) : "") << ',' << fmt(r.f_u)
               << ',' << r.solver_iters << ',' << r.extract_iters << ',';
        } else {
            os << ",,,,,,,";
        }
        os << (include_timing && r.ok ? fmt(r.wall_ms) : "") << ',' << r.seed << ','
           << r.status << '\n';
    }
}

std::string csv_string(const std::vector<ResultRow>& rows, bool include_timing) {
    std::ostringstream ss;
    write_csv(rows, ss, include_timing);
    return ss.str();
}

void write_summary_json(const ScenarioConfig& config, const ScenarioOutput& out,
                        std::ostream& os) {
    nlohmann::json j;
    j["scenario"] = config.scenario;
    j["constellation"] = config.constellation;
    j["K"] = config.K;
    j["snr_db"] = std::isfinite(config.snr_db) ? nlohmann::json(config.snr_db)
                                               : nlohmann::json("inf");
    j["L_w"] = config.L_w;
    j["runs"] = config.runs;
    j["seed"] = config.seed;
    j["algorithms"] = nlohmann::json::array();
    for (const auto& s : out.summaries) {
        nlohmann::json a;
        a["algorithm"] = s.algorithm;
        a["runs_ok"] = s.runs_ok;
        a["mean_isi_db"] = s.mean_isi_db;
        a["stderr_isi_db"] = s.stderr_isi_db;
        a["isi_db_of_mean"] = s.isi_db_of_mean;
        if (s.mean_ncci_db) a["mean_ncci_db"] = *s.mean_ncci_db;
        a["mean_ser"] = s.mean_ser;
        if (s.mean_tau) a["mean_tau"] = *s.mean_tau;
        a["mean_f_u"] = s.mean_f_u;
        a["mean_wall_ms"] = s.mean_wall_ms;
        j["algorithms"].push_back(a);
    }
    os << j.dump(2) << "\n";
}

namespace {

AlgorithmSpec parse_algorithm(const nlohmann::json& a) {
    AlgorithmSpec spec;
    if (a.is_string()) {
        spec.name = a.get<std::string>();
        return spec;
    }
    spec.name = a.at("name").get<std::string>();
    if (a.contains("post")) spec.post = a["post"].get<std::string>();
    if (a.contains("alpha")) spec.alpha = a["alpha"].get<double>();
    if (a.contains("lambda_p")) spec.lambda_p = a["lambda_p"].get<double>();
    if (a.contains("lambda")) spec.lambda = a["lambda"].get<double>();
    if (a.contains("L_t")) spec.L_t = a["L_t"].get<int>();
    if (a.contains("step")) spec.step = a["step"].get<double>();
    if (a.contains("bgd_iters")) spec.bgd_iters = a["bgd_iters"].get<int>();
    if (a.contains("spike_pos")) spec.spike_pos = a["spike_pos"].get<int>();
    return spec;
}

double parse_snr(const nlohmann::json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "noiseless")
            return std::numeric_limits<double>::infinity();
        throw InvalidInput("config: snr_db must be a number or \"inf\"");
    }
    return v.get<double>();
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    ScenarioConfig c;
    if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
    if (j.contains("constellation")) c.constellation = j["constellation"].get<std::string>();
    if (j.contains("K")) c.K = j["K"].get<int>();
    if (j.contains("snr_db")) c.snr_db = parse_snr(j["snr_db"]);
    if (j.contains("L_w")) c.L_w = j["L_w"].get<int>();
    if (j.contains("runs")) c.runs = j["runs"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("lambda_cr")) c.lambda_cr = j["lambda_cr"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<int>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("channel")) {
        const auto& ch = j["channel"];
        if (ch.contains("preset")) c.channel.preset = ch["preset"].get<std::string>();
        if (ch.contains("rayleigh_taps"))
            c.channel.rayleigh_taps = ch["rayleigh_taps"].get<int>();
        if (ch.contains("rayleigh_total_power"))
            c.channel.rayleigh_total_power = ch["rayleigh_total_power"].get<bool>();
        if (ch.contains("taps")) {
            // taps[rx][tx][m] = [re, im]
            ChannelModel m;
            const auto& taps = ch["taps"];
            m.n_rx = static_cast<int>(taps.size());
            m.taps.resize(m.n_rx);
            for (int jj = 0; jj < m.n_rx; ++jj) {
                const auto& row = taps[jj];
                m.n_tx = static_cast<int>(row.size());
                m.taps[jj].resize(m.n_tx);
                for (int n = 0; n < m.n_tx; ++n)
                    for (const auto& t : row[n])
                        m.taps[jj][n].push_back(cplx(t[0].get<double>(), t[1].get<double>()));
            }
            validate_channel(m);
            c.channel.explicit_taps = m;
        }
    }
    if (j.contains("algorithms"))
        for (const auto& a : j["algorithms"]) c.algorithms.push_back(parse_algorithm(a));
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (s.contains("eps_gap")) c.solver.eps_gap = s["eps_gap"].get<double>();
        if (s.contains("eps_feas")) c.solver.eps_feas = s["eps_feas"].get<double>();
        if (s.contains("max_iters")) c.solver.max_iters = s["max_iters"].get<int>();
        if (s.contains("method"))
            c.solver.method = s["method"].get<std::string>() == "interior_point"
                                  ? SolverSettings::Method::interior_point
                                  : SolverSettings::Method::splitting;
    }
    if (j.contains("extraction")) {
        const auto& e = j["extraction"];
        if (e.contains("gamma")) c.extraction.gamma = e["gamma"].get<double>();
        if (e.contains("max_iters")) c.extraction.max_iters = e["max_iters"].get<int>();
        if (e.contains("conv_tol")) c.extraction.conv_tol = e["conv_tol"].get<double>();
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace coeq
