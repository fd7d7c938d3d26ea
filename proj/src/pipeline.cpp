#include "timegate/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "timegate/format_util.hpp"
#include "timegate/numerics.hpp"
#include "timegate/rng.hpp"
#include "timegate/trace_io.hpp"

namespace timegate {

namespace {

// Seed-stream indices for the pipeline stages.
constexpr std::uint64_t stream_clicks = 11;
constexpr std::uint64_t stream_signal = 21;
constexpr std::uint64_t stream_vacuum = 22;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("report: cannot write '" + path + "'");
    out << text;
}

}  // namespace

void Report::add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
}

void Report::add(const std::string& key, double value) { entries.emplace_back(key, format_g(value)); }

const std::string* Report::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::string Report::render() const {
    std::ostringstream out;
    for (const auto& [key, value] : entries) out << key << " = " << value << "\n";
    out << summary_from_entries(entries);
    return out.str();
}

std::string Report::summary_from_entries(
    const std::vector<std::pair<std::string, std::string>>& entries) {
    auto get = [&](const std::string& key) -> std::string {
        for (const auto& [k, v] : entries)
            if (k == key) return v;
        return "n/a";
    };
    std::ostringstream out;
    out << "\n# Summary\n";
    out << "# Pulse " << get("pulse.duration_ns") << " ns, gate " << get("gate.length_ns")
        << " ns centered at " << get("gate.center_ns") << " ns.\n";
    out << "# Clicks: " << get("clicks.total") << " in " << get("clicks.live_time_s")
        << " s live (" << get("clicks.rate_per_live_s") << " /s; model background "
        << get("clicks.model_background_rate_per_s") << " /s).\n";
    out << "# Heralds in gate: " << get("gate.herald_count") << " ("
        << get("gate.herald_rate_per_live_s") << " /s live).\n";
    out << "# Mode fidelity (estimated vs optimal): " << get("mode.fidelity_estimated_vs_optimal")
        << "; projection used the " << get("analysis.mode_source") << " mode.\n";
    out << "# Fitted diagonals: rho00 = " << get("fit.rho00") << ", rho11 = " << get("fit.rho11")
        << ", rho22 = " << get("fit.rho22") << " (EM, " << get("fit.em_iterations")
        << " iterations).\n";
    out << "# W(0,0) = " << get("fit.w00") << " (binned-fit cross-check "
        << get("fit.w00_binned") << ").\n";
    out << "# Spectral brightness figure: " << get("brightness.per_s_per_hz") << " s^-1/Hz.\n";
    return out.str();
}

Report Report::parse(const std::string& text) {
    Report report;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto sep = line.find(" = ");
        if (sep == std::string::npos) throw FormatError("report: malformed line: " + line);
        report.entries.emplace_back(line.substr(0, sep), line.substr(sep + 3));
    }
    if (report.entries.empty()) throw FormatError("report: no key/value entries found");
    return report;
}

PipelineResult run_pipeline(const RunConfig& config) {
    config.validate();
    PipelineResult result;
    Report& report = result.report;

    const PulseProfile pulse = config.pulse_profile();
    const FilterChain chain = config.filter_chain();
    const CavityFilter opo = config.opo_filter();
    const std::size_t n_grid = config.n_grid_samples();
    const double dt = config.dt_ns;

    report.add("config.hash", format_g(static_cast<double>(config.hash() >> 32), 10));
    report.add("pulse.duration_ns", config.pulse.duration_ns);
    report.add("pulse.rise_ns", config.pulse.rise_ns);
    report.add("pulse.extinction", config.pulse.extinction);
    report.add("seed", static_cast<double>(config.seed));

    // --- click model and Monte Carlo histogram ---------------------------
    result.rate_profile =
        click_rate_profile(pulse, chain, config.apd, n_grid, dt, config.leakage_mode());
    const auto& rate = result.rate_profile.samples;
    const std::size_t peak_index = static_cast<std::size_t>(
        std::max_element(rate.begin(), rate.end()) - rate.begin());
    const double peak_delay = result.rate_profile.time_at(peak_index);

    const double leak = config.leakage_mode() == LeakageMode::intensity_ratio
                            ? config.pulse.extinction
                            : config.pulse.extinction * config.pulse.extinction;
    const double c_anchor =
        std::max(config.apd.cw_reference_rate_per_s - config.apd.dark_rate_per_s, 0.0);
    const double background_rate = c_anchor * leak + config.apd.dark_rate_per_s;

    // expected in-window click rate per second of live time
    std::vector<double> per_bin(rate.size());
    for (std::size_t i = 0; i < rate.size(); ++i) per_bin[i] = rate[i] * dt * 1e-9;
    const double expected_per_pulse = pairwise_sum(per_bin);
    const double model_rate_per_live_s = expected_per_pulse * config.timing.rep_rate_hz;

    const auto clicks = simulate_clicks(config.timing, result.rate_profile,
                                        config.clicks.n_pulses, config.seed + stream_clicks);
    const double live_time_s =
        static_cast<double>(config.clicks.n_pulses) / config.timing.rep_rate_hz;

    report.add("clicks.n_pulses", static_cast<double>(config.clicks.n_pulses));
    report.add("clicks.total", static_cast<double>(clicks.size()));
    report.add("clicks.live_time_s", live_time_s);
    report.add("clicks.rate_per_live_s", static_cast<double>(clicks.size()) / live_time_s);
    report.add("clicks.rate_per_wall_s",
               static_cast<double>(clicks.size()) / live_time_s * config.timing.duty_fraction());
    report.add("clicks.model_rate_per_live_s", model_rate_per_live_s);
    report.add("clicks.model_background_rate_per_s", background_rate);
    report.add("clicks.model_peak_delay_ns", peak_delay);

    result.histogram = histogram_clicks(clicks, config.clicks.bin_ns,
                                        config.timing.measure_window_ns, live_time_s,
                                        /*normalize=*/!clicks.empty());
    if (!clicks.empty()) {
        const auto scale_fit = fit_scale_to_model(result.histogram, result.rate_profile);
        report.add("clicks.scale_fit", scale_fit.scale);
        report.add("clicks.scale_fit_sigma", scale_fit.scale_sigma);
        report.add("clicks.scale_fit_chi2_per_bin", scale_fit.chi2_per_bin);
        report.add("clicks.histogram_background_level", result.histogram.background_level);
    }

    // --- acceptance gate --------------------------------------------------
    const double gate_center = config.gate.center_ns.value_or(peak_delay);
    const auto gated = gate_clicks(clicks, gate_center, config.gate.length_ns);
    report.add("gate.center_ns", gate_center);
    report.add("gate.length_ns", config.gate.length_ns);
    report.add("gate.herald_count", static_cast<double>(gated.size()));
    report.add("gate.herald_rate_per_live_s", static_cast<double>(gated.size()) / live_time_s);

    // model-derived share of background heralds inside the gate
    double in_gate_total = 0.0, in_gate_background = 0.0;
    for (std::size_t i = 0; i < rate.size(); ++i) {
        const double t = result.rate_profile.time_at(i);
        if (std::abs(t - gate_center) <= 0.5 * config.gate.length_ns) {
            in_gate_total += rate[i];
            in_gate_background += background_rate;
        }
    }
    const double auto_background_fraction =
        in_gate_total > 0.0 ? in_gate_background / in_gate_total : 0.0;
    const double background_fraction = config.truth.background_fraction < 0.0
                                           ? auto_background_fraction
                                           : config.truth.background_fraction;
    report.add("gate.model_background_fraction", auto_background_fraction);
    report.add("truth.background_fraction_used", background_fraction);

    // --- synthetic homodyne windows ---------------------------------------
    const TargetState state = TargetState::normalized(config.truth.populations);
    result.mode_optimal = optimal_mode(pulse, opo, config.truth.mode_delay_ns, n_grid, dt);

    const ElectronicNoise noise{config.truth.noise_rms, config.truth.noise_corner_mhz};
    const TraceSet signal_set = generate_trace_set(
        state, result.mode_optimal, config.truth.n_windows, /*vacuum=*/false,
        config.seed + stream_signal, gate_center, config.gate.length_ns, background_fraction,
        noise, dt);
    const TraceSet vacuum_set = generate_trace_set(
        state, result.mode_optimal, config.truth.n_vacuum, /*vacuum=*/true,
        config.seed + stream_vacuum, gate_center, config.gate.length_ns, 0.0, noise, dt);

    report.add("truth.n_windows", static_cast<double>(config.truth.n_windows));
    report.add("truth.mean_photon_number", state.mean_photon_number());

    // --- variance trace and temporal mode ----------------------------------
    result.variance_raw = variance_trace(signal_set, vacuum_set);
    result.variance_lowpassed = lowpass(result.variance_raw, config.analysis.lowpass_mhz);

    double fidelity_est = 0.0;
    try {
        result.mode_estimated = estimate_mode_from_variance(result.variance_lowpassed);
        result.mode_estimated_available = true;
        fidelity_est = ModeFunction::fidelity(result.mode_estimated, result.mode_optimal);
    } catch (const NoSignal&) {
        if (config.analysis.mode_source == "estimated") throw;
        result.mode_estimated_available = false;
    }
    report.add("mode.estimated_available", result.mode_estimated_available ? 1.0 : 0.0);
    report.add("mode.fidelity_estimated_vs_optimal", fidelity_est);
    report.add("analysis.mode_source", config.analysis.mode_source);

    result.mode_used = config.analysis.mode_source == "estimated" ? result.mode_estimated
                                                                  : result.mode_optimal;

    // --- projection, fit, Wigner center ------------------------------------
    result.quadratures = project(signal_set, result.mode_used, vacuum_set);
    report.add("quadratures.count", static_cast<double>(result.quadratures.points.size()));
    report.add("quadratures.variance", result.quadratures.variance());

    EmOptions em;
    em.tol = config.analysis.em_tol;
    em.max_iter = config.analysis.em_max_iter;
    em.min_points = config.analysis.em_min_points;
    if (config.analysis.fock_cutoff < fock_cutoff) {
        // zero weight beyond the configured cutoff; EM keeps zeros at zero
        std::array<double, fock_cutoff + 1> init{};
        for (int n = 0; n <= config.analysis.fock_cutoff; ++n)
            init[static_cast<std::size_t>(n)] =
                1.0 / static_cast<double>(config.analysis.fock_cutoff + 1);
        em.initial = init;
    }
    result.fit = fit_fock_mixture(result.quadratures, em);
    result.fit_binned = fit_fock_mixture_binned(result.quadratures);
    result.marginal = marginal_histogram(result.quadratures);

    for (int n = 0; n <= fock_cutoff; ++n)
        report.add("fit.rho" + std::to_string(n) + std::to_string(n),
                   result.fit.rho.rho[static_cast<std::size_t>(n)]);
    report.add("fit.em_iterations", static_cast<double>(result.fit.diagnostics.iterations));
    report.add("fit.em_converged", result.fit.diagnostics.converged ? 1.0 : 0.0);
    report.add("fit.em_log_likelihood", result.fit.diagnostics.final_log_likelihood);
    report.add("fit.w00", wigner_center(result.fit.rho));
    report.add("fit.w00_binned", wigner_center(result.fit_binned));
    for (int n = 0; n <= 2; ++n)
        report.add("fit.rho" + std::to_string(n) + std::to_string(n) + "_binned",
                   result.fit_binned.rho[static_cast<std::size_t>(n)]);

    // short aliases used by the summary
    report.add("fit.rho00", result.fit.rho.rho[0]);
    report.add("fit.rho11", result.fit.rho.rho[1]);
    report.add("fit.rho22", result.fit.rho.rho[2]);

    // rate per unit bandwidth, the source comparison figure of merit
    const double opo_bandwidth_hz = 2.0 * opo.kappa_rad_per_ns / two_pi * 1e9;
    report.add("brightness.per_s_per_hz",
               static_cast<double>(gated.size()) / live_time_s / opo_bandwidth_hz);

    return result;
}

PipelineResult run_pipeline(const RunConfig& config, const std::string& out_dir) {
    PipelineResult result = run_pipeline(config);
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    write_text(path("report.txt"), result.report.render());
    write_histogram_csv(path("click_histogram.csv"), result.histogram);

    {
        std::ostringstream csv;
        csv << "t_ns,rate_per_s\n";
        for (std::size_t i = 0; i < result.rate_profile.size(); ++i)
            csv << format_g(result.rate_profile.time_at(i)) << ","
                << format_g(result.rate_profile.samples[i]) << "\n";
        write_text(path("click_model.csv"), csv.str());
    }
    {
        std::ostringstream csv;
        csv << "t_ns,variance,variance_lowpassed\n";
        for (std::size_t i = 0; i < result.variance_raw.values.size(); ++i)
            csv << format_g(result.variance_raw.dt_ns * static_cast<double>(i)) << ","
                << format_g(result.variance_raw.values[i]) << ","
                << format_g(result.variance_lowpassed.values[i]) << "\n";
        write_text(path("variance_trace.csv"), csv.str());
    }
    {
        std::ostringstream csv;
        csv << "t_ns,optimal,estimated\n";
        for (std::size_t i = 0; i < result.mode_optimal.values.size(); ++i) {
            csv << format_g(result.variance_raw.dt_ns * static_cast<double>(i)) << ","
                << format_g(result.mode_optimal.values[i]) << ",";
            csv << format_g(result.mode_estimated_available ? result.mode_estimated.values[i] : 0.0)
                << "\n";
        }
        write_text(path("mode.csv"), csv.str());
    }
    {
        std::ostringstream csv;
        csv << "bin_center,empirical_density,fitted_density\n";
        for (std::size_t i = 0; i < result.marginal.bin_centers.size(); ++i)
            csv << format_g(result.marginal.bin_centers[i]) << ","
                << format_g(result.marginal.density[i]) << ","
                << format_g(mixture_density(result.fit.rho, result.marginal.bin_centers[i]))
                << "\n";
        write_text(path("marginal.csv"), csv.str());
    }
    return result;
}

}  // namespace timegate
