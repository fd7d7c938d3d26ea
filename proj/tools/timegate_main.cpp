// timegate: pulsed-OPO heralded single photon simulation and tomography.
//
// Subcommands mirror the pipeline stages; see README.md for examples.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "timegate/config.hpp"
#include "timegate/format_util.hpp"
#include "timegate/pipeline.hpp"
#include "timegate/trace_io.hpp"

namespace {

using namespace timegate;

RunConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) {
        RunConfig config;
        config.validate();
        return config;
    }
    return load_config(config_path);
}

ModeFunction config_mode(const RunConfig& config) {
    return optimal_mode(config.pulse_profile(), config.opo_filter(), config.truth.mode_delay_ns,
                        config.n_grid_samples(), config.dt_ns);
}

double gate_center_or_model_peak(const RunConfig& config) {
    if (config.gate.center_ns) return *config.gate.center_ns;
    const auto rate = click_rate_profile(config.pulse_profile(), config.filter_chain(), config.apd,
                                         config.n_grid_samples(), config.dt_ns,
                                         config.leakage_mode());
    std::size_t peak = 0;
    for (std::size_t i = 1; i < rate.size(); ++i)
        if (rate.samples[i] > rate.samples[peak]) peak = i;
    return rate.time_at(peak);
}

void write_mode_csv(const std::string& path, const ModeFunction& mode, double dt_ns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("mode csv: cannot write '" + path + "'");
    out << "t_ns,value\n";
    for (std::size_t i = 0; i < mode.values.size(); ++i)
        out << format_g(dt_ns * static_cast<double>(i)) << "," << format_g(mode.values[i]) << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"Pulsed-OPO heralded single photon simulator and tomography toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");

    // --- simulate-clicks ---------------------------------------------------
    auto* sim_clicks = app.add_subcommand("simulate-clicks", "Monte Carlo APD click delays");
    std::optional<double> opt_pulse_ns, opt_rep_rate;
    std::optional<std::int64_t> opt_n_pulses;
    std::uint64_t clicks_seed = 0;
    std::string clicks_out = "clicks.csv";
    std::string clicks_hist_out;
    sim_clicks->add_option("--pulse-ns", opt_pulse_ns, "override pulse flat-top length (ns)");
    sim_clicks->add_option("--rep-rate", opt_rep_rate, "override repetition rate (Hz)");
    sim_clicks->add_option("--n-pulses", opt_n_pulses, "number of pump pulses");
    sim_clicks->add_option("--seed", clicks_seed, "RNG seed")->required();
    sim_clicks->add_option("--out", clicks_out, "output CSV path");
    sim_clicks->add_option("--hist-out", clicks_hist_out, "also write a histogram CSV here");

    // --- simulate-homodyne ---------------------------------------------------
    auto* sim_hd = app.add_subcommand("simulate-homodyne", "synthetic heralded homodyne windows");
    std::vector<double> hd_state;
    std::optional<std::uint64_t> hd_windows;
    bool hd_vacuum = false;
    std::uint64_t hd_seed = 0;
    std::string hd_out = "traces.tgt";
    sim_hd->add_option("--state", hd_state, "populations rho00..rho66 (normalized)");
    sim_hd->add_option("--n-windows", hd_windows, "number of windows");
    sim_hd->add_flag("--vacuum", hd_vacuum, "generate vacuum calibration windows");
    sim_hd->add_option("--seed", hd_seed, "RNG seed")->required();
    sim_hd->add_option("--out", hd_out, "output trace file (.tgt)");

    // --- extract-mode ---------------------------------------------------
    auto* extract = app.add_subcommand("extract-mode", "variance trace -> temporal mode");
    std::string ex_signal, ex_vacuum, ex_out = "mode.csv";
    extract->add_option("--signal", ex_signal, "signal trace file")->required();
    extract->add_option("--vacuum", ex_vacuum, "vacuum trace file")->required();
    extract->add_option("--out", ex_out, "mode CSV output");

    // --- tomography ---------------------------------------------------
    auto* tomo = app.add_subcommand("tomography", "project traces and fit the Fock mixture");
    std::string tm_signal, tm_vacuum, tm_out_dir = ".";
    bool tm_estimate_mode = false;
    tomo->add_option("--signal", tm_signal, "signal trace file")->required();
    tomo->add_option("--vacuum", tm_vacuum, "vacuum trace file")->required();
    tomo->add_option("--out-dir", tm_out_dir, "output directory");
    tomo->add_flag("--estimate-mode", tm_estimate_mode,
                   "project on the variance-estimated mode instead of the model mode");

    // --- run-pipeline ---------------------------------------------------
    auto* pipeline = app.add_subcommand("run-pipeline", "full chain, writes report and CSVs");
    std::string pl_out_dir = "run";
    std::optional<std::uint64_t> pl_seed;
    pipeline->add_option("--out-dir", pl_out_dir, "output directory");
    pipeline->add_option("--seed", pl_seed, "override config seed");

    // --- report ---------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "re-render the summary of a finished run");
    std::string rp_dir = "run";
    report_cmd->add_option("--run-dir", rp_dir, "directory containing report.txt");

    CLI11_PARSE(app, argc, argv);

    if (sim_clicks->parsed()) {
        RunConfig config = load_or_default(config_path);
        if (opt_pulse_ns) config.pulse.duration_ns = *opt_pulse_ns;
        if (opt_rep_rate) config.timing.rep_rate_hz = *opt_rep_rate;
        if (opt_n_pulses) config.clicks.n_pulses = *opt_n_pulses;
        config.validate();
        const auto rate =
            click_rate_profile(config.pulse_profile(), config.filter_chain(), config.apd,
                               config.n_grid_samples(), config.dt_ns, config.leakage_mode());
        const auto clicks =
            simulate_clicks(config.timing, rate, config.clicks.n_pulses, clicks_seed);
        write_clicks_csv(clicks_out, clicks);
        const double live = static_cast<double>(config.clicks.n_pulses) / config.timing.rep_rate_hz;
        std::cout << clicks.size() << " clicks from " << config.clicks.n_pulses << " pulses ("
                  << format_g(live) << " s live) -> " << clicks_out << "\n";
        if (!clicks_hist_out.empty()) {
            const auto hist =
                histogram_clicks(clicks, config.clicks.bin_ns, config.timing.measure_window_ns,
                                 live, !clicks.empty());
            write_histogram_csv(clicks_hist_out, hist);
            std::cout << "histogram -> " << clicks_hist_out << "\n";
        }
        return 0;
    }

    if (sim_hd->parsed()) {
        RunConfig config = load_or_default(config_path);
        if (!hd_state.empty()) config.truth.populations = hd_state;
        if (hd_windows) config.truth.n_windows = *hd_windows;
        config.validate();
        const TargetState state = TargetState::normalized(config.truth.populations);
        const ModeFunction mode = config_mode(config);
        const double center = gate_center_or_model_peak(config);
        const double bg = config.truth.background_fraction < 0.0 ? 0.0
                                                                 : config.truth.background_fraction;
        TraceSet set = generate_trace_set(
            state, mode, config.truth.n_windows, hd_vacuum, hd_seed, center,
            config.gate.length_ns, hd_vacuum ? 0.0 : bg,
            ElectronicNoise{config.truth.noise_rms, config.truth.noise_corner_mhz}, config.dt_ns);
        set.meta.config_hash = config.hash();
        write_trace_set(hd_out, set);
        std::cout << set.n_windows() << (hd_vacuum ? " vacuum" : " signal") << " windows -> "
                  << hd_out << "\n";
        return 0;
    }

    if (extract->parsed()) {
        RunConfig config = load_or_default(config_path);
        const TraceSet signal = read_trace_set(ex_signal);
        const TraceSet vacuum = read_trace_set(ex_vacuum);
        const auto trace = variance_trace(signal, vacuum);
        const auto smoothed = lowpass(trace, config.analysis.lowpass_mhz);
        const auto mode = estimate_mode_from_variance(smoothed);
        write_mode_csv(ex_out, mode, signal.dt_ns);
        const auto reference = config_mode(config);
        if (reference.values.size() == mode.values.size())
            std::cout << "fidelity vs model mode: "
                      << format_g(ModeFunction::fidelity(mode, reference)) << "\n";
        std::cout << "mode (" << mode.values.size() << " samples) -> " << ex_out << "\n";
        return 0;
    }

    if (tomo->parsed()) {
        RunConfig config = load_or_default(config_path);
        const TraceSet signal = read_trace_set(tm_signal);
        const TraceSet vacuum = read_trace_set(tm_vacuum);
        ModeFunction mode;
        if (tm_estimate_mode) {
            const auto trace = variance_trace(signal, vacuum);
            mode = estimate_mode_from_variance(lowpass(trace, config.analysis.lowpass_mhz));
        } else {
            mode = config_mode(config);
        }
        const auto q = project(signal, mode, vacuum);
        EmOptions em;
        em.tol = config.analysis.em_tol;
        em.max_iter = config.analysis.em_max_iter;
        em.min_points = config.analysis.em_min_points;
        const auto fit = fit_fock_mixture(q, em);
        const auto marginal = marginal_histogram(q);

        namespace fs = std::filesystem;
        fs::create_directories(tm_out_dir);
        std::ofstream out(fs::path(tm_out_dir) / "tomography.txt", std::ios::binary);
        for (int n = 0; n <= fock_cutoff; ++n)
            out << "rho" << n << n << " = " << format_g(fit.rho.rho[static_cast<std::size_t>(n)])
                << "\n";
        out << "w00 = " << format_g(wigner_center(fit.rho)) << "\n";
        out << "em_iterations = " << fit.diagnostics.iterations << "\n";

        std::ofstream marg(fs::path(tm_out_dir) / "marginal.csv", std::ios::binary);
        marg << "bin_center,empirical_density,fitted_density\n";
        for (std::size_t i = 0; i < marginal.bin_centers.size(); ++i)
            marg << format_g(marginal.bin_centers[i]) << "," << format_g(marginal.density[i])
                 << "," << format_g(mixture_density(fit.rho, marginal.bin_centers[i])) << "\n";

        std::cout << "rho00 = " << format_g(fit.rho.rho[0]) << ", rho11 = "
                  << format_g(fit.rho.rho[1]) << ", W(0,0) = " << format_g(wigner_center(fit.rho))
                  << "\n";
        std::cout << "tomography -> " << tm_out_dir << "\n";
        return 0;
    }

    if (pipeline->parsed()) {
        RunConfig config = load_or_default(config_path);
        if (pl_seed) config.seed = *pl_seed;
        const auto result = run_pipeline(config, pl_out_dir);
        std::cout << Report::summary_from_entries(result.report.entries);
        std::cout << "artifacts -> " << pl_out_dir << "\n";
        return 0;
    }

    if (report_cmd->parsed()) {
        const auto path = std::filesystem::path(rp_dir) / "report.txt";
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("report: cannot open '" + path.string() + "'");
        std::ostringstream text;
        text << in.rdbuf();
        const Report report = Report::parse(text.str());
        std::cout << Report::summary_from_entries(report.entries);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const timegate::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
