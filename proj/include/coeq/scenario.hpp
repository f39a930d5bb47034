#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coeq/channel.hpp"
#include "coeq/extraction.hpp"
#include "coeq/sdp.hpp"
#include "coeq/types.hpp"

namespace coeq {

/// One algorithm entry of a scenario. Names: co-cma, co-swa, co-med,
/// co-sb-cma, bgd-cma, bgd-sb-cma, optimal.
struct AlgorithmSpec {
    std::string name = "co-cma";
    std::string post = "pp2";  // rank-1 post-processing: pp1 | pp2
    double alpha = 0.5;        // SWA mixing parameter
    double lambda_p = 2.0;     // MED power multiplier
    double lambda = 0.5;       // semiblind blend weight
    int L_t = 8;               // pilot length
    double step = 0.01;        // BGD step size
    int bgd_iters = 200000;
    int spike_pos = -1;        // BGD spike init; -1 picks the near-center tap
};

/// Channel source: a named preset, an explicit tap set, or the random
/// Rayleigh ensemble drawn per run.
struct ChannelSpec {
    std::string preset;  // dogancay7 | mimo2x2 | mix4x4 | rayleigh3 | "" (explicit)
    std::optional<ChannelModel> explicit_taps;
    int rayleigh_taps = 3;
    bool rayleigh_total_power = false;  // false: unit power per tap
};

struct ScenarioConfig {
    std::string scenario = "scenario";
    ChannelSpec channel;
    std::string constellation = "qpsk";
    int K = 1000;
    double snr_db = std::numeric_limits<double>::infinity();
    int L_w = 5;
    int runs = 1;
    std::uint64_t seed = 1;
    double lambda_cr = 1.0;  // cross-correlation penalty weight (multi-stream)
    int delta = 0;           // cross-correlation lag range
    std::vector<AlgorithmSpec> algorithms;
    // The harness runs the solver past the library defaults so certificate
    // noise sits decades under the extraction threshold gamma.
    SolverSettings solver{.eps_gap = 1e-9, .eps_feas = 1e-9};
    ExtractionSettings extraction;
    int threads = 0;  // 0: hardware concurrency
};

struct ResultRow {
    int run = 0;
    std::string scenario;
    std::string algorithm;
    double snr_db = 0.0;
    int K = 0;
    double isi_db = kDbFloor;
    std::optional<double> ncci_db;  // instantaneous scenarios only
    double ser = 0.0;
    std::optional<double> tau;  // convex-optimization rows only
    double f_u = 0.0;
    int solver_iters = 0;
    int extract_iters = 0;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    bool ok = true;
};

struct AlgorithmSummary {
    std::string algorithm;
    int runs_ok = 0;
    double mean_isi_db = 0.0;        // mean of per-run dB values
    double stderr_isi_db = 0.0;
    double isi_db_of_mean = 0.0;     // dB of the mean linear ISI
    std::optional<double> mean_ncci_db;
    double mean_ser = 0.0;
    std::optional<double> mean_tau;
    double mean_f_u = 0.0;
    double mean_wall_ms = 0.0;
};

struct ScenarioOutput {
    std::vector<ResultRow> rows;  // sorted by run, then algorithm order
    std::vector<AlgorithmSummary> summaries;
};

/// Fixed benchmark channel presets with pinned coefficients; throws
/// InvalidInput listing the known names on a miss. rayleigh3 is an ensemble
/// spec and has no fixed taps, so it is rejected here.
ChannelModel preset_channel(const std::string& name);
std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);

/// Channel for one run (presets are fixed, ensembles draw from the seed).
ChannelModel instantiate_channel(const ChannelSpec& spec, std::uint64_t seed);

/// Full Monte Carlo sweep; runs execute in parallel and per-run failures are
/// recorded in the row status without aborting the batch.
ScenarioOutput run_scenario(const ScenarioConfig& config);

/// One (run, algorithm) cell with its artifacts kept, for callers that need
/// the equalizers or the channel realization and not just the metrics.
struct RunArtifacts {
    ResultRow row;
    ChannelModel channel;
    SignalFrame frame;
    EqualizerBank bank;
};

RunArtifacts run_one(const ScenarioConfig& config, const AlgorithmSpec& alg, int run);

/// Fixed-order CSV of the result rows; timing is left blank unless
/// include_timing is set so that reruns are byte-identical.
void write_csv(const std::vector<ResultRow>& rows, std::ostream& os,
               bool include_timing = false);
std::string csv_string(const std::vector<ResultRow>& rows, bool include_timing = false);

/// Aggregate summary as JSON.
void write_summary_json(const ScenarioConfig& config, const ScenarioOutput& out,
                        std::ostream& os);

/// Config file I/O (JSON, nested keys; CLI flags override).
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

}  // namespace coeq
