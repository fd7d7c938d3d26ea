#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "timegate/clicks.hpp"
#include "timegate/signal.hpp"

namespace timegate {

// Full run configuration. Defaults reproduce the reference experiment:
// 49 ns pulse with 5 ns rise and 1.5e-2 extinction, OPO (2.2 MHz half-width,
// i.e. 4.4 MHz full bandwidth) plus 12 MHz filter cavity, 50 kHz repetition,
// 500 ns windows at 1 ns, 40 ns acceptance gate, 25 MHz analysis low-pass,
// 0.4 / 275 s^-1 dark and cw rates.
struct RunConfig {
    struct Pulse {
        double duration_ns = 49.0;
        double rise_ns = 5.0;
        double extinction = 0.015;
    } pulse;

    // kappa/2pi per cavity, MHz; the first entry is the OPO.
    std::vector<double> filters_half_width_mhz = {2.2, 12.0};

    ExperimentTiming timing;

    ApdModel apd;

    struct Gate {
        std::optional<double> center_ns;  // unset: centered on the model peak
        double length_ns = 40.0;
    } gate;

    struct Analysis {
        double lowpass_mhz = 25.0;
        int fock_cutoff = 6;
        double em_tol = 1e-9;
        std::uint64_t em_max_iter = 100000;
        std::uint64_t em_min_points = 1000;
        // "optimal": project on the model mode (default); "estimated":
        // project on the variance-derived mode.
        std::string mode_source = "optimal";
    } analysis;

    struct Clicks {
        std::int64_t n_pulses = 2000000;
        double bin_ns = 2.0;
        std::string leakage = "intensity";  // or "field"
    } clicks;

    // Ground truth of the synthetic source.
    struct Truth {
        std::vector<double> populations = {0.392, 0.595, 0.010};
        std::uint64_t n_windows = 13000;
        std::uint64_t n_vacuum = 13000;
        // Fraction of heralds that qualify a vacuum window; -1 derives it
        // from the click model's in-gate background share.
        double background_fraction = 0.0;
        double mode_delay_ns = 0.0;
        double noise_rms = 0.0;
        double noise_corner_mhz = 50.0;
    } truth;

    double dt_ns = 1.0;
    std::uint64_t seed = 1;

    void validate() const;

    PulseProfile pulse_profile() const;
    FilterChain filter_chain() const;
    CavityFilter opo_filter() const;
    LeakageMode leakage_mode() const;
    std::size_t n_grid_samples() const;

    // Canonical JSON rendering (sorted keys, stable formatting).
    std::string canonical_json() const;
    std::uint64_t hash() const;
};

// Parse a config from JSON text. An empty (or whitespace-only) document and
// the empty object both yield the defaults. Unknown keys are rejected with
// ParseError; invariant violations raise ValidationError naming the field.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

}  // namespace timegate
