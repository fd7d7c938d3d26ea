#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "timegate/signal.hpp"

namespace timegate {

// Repetition and duty-cycle bookkeeping for pulsed runs.
struct ExperimentTiming {
    double rep_rate_hz = 50e3;
    double measure_window_ns = 500.0;
    double duty_measure_s = 0.2;
    double duty_lock_s = 0.8;

    void validate() const;
    // Fraction of wall time spent measuring.
    double duty_fraction() const;
};

// Click detector: dark counts plus a calibration anchor, the click rate
// observed under continuous (un-pulsed) pumping.
struct ApdModel {
    double dark_rate_per_s = 0.4;
    double cw_reference_rate_per_s = 275.0;

    void validate() const;
};

// How the pulse shaper's off-state leakage enters the click rate.
// The extinction number is the measured power leakage fraction; the leaked
// field amplitude is then sqrt(extinction). The field-squared alternative
// treats the extinction number as a field floor directly, giving a
// background of extinction^2 relative to cw.
enum class LeakageMode { intensity_ratio, field_squared };

struct ClickRecord {
    std::int64_t pulse_index = 0;
    double delay_ns = 0.0;
};

struct DelayHistogram {
    std::vector<double> bin_edges_ns;     // size n_bins + 1
    std::vector<std::uint64_t> counts;    // size n_bins
    double total_live_time_s = 0.0;
    // counts divided by the mean off-pulse (background) bin count
    std::optional<std::vector<double>> normalized;
    double background_level = 0.0;  // mean background bin count used above

    std::size_t n_bins() const { return counts.size(); }
    double bin_width_ns() const {
        return bin_edges_ns.size() > 1 ? bin_edges_ns[1] - bin_edges_ns[0] : 0.0;
    }
};

struct ScaleFitResult {
    double scale = 0.0;
    double scale_sigma = 0.0;       // 1-sigma Poisson uncertainty of the scale
    double data_background = 0.0;   // subtracted background (counts per bin)
    double model_background = 0.0;  // model plateau removed before fitting
    std::vector<double> residuals;  // per bin, data - scale*model (both background-free)
    double chi2_per_bin = 0.0;
};

// Instantaneous APD click rate (s^-1) as a function of delay from the pulse
// front: rate(t) = C*(leak + (1-leak)*|z(t)|^2) + dark, with z the bare
// pulse envelope filtered by the cascade and C anchored so that a constant
// envelope (cw pumping) reproduces the cw reference rate. Down-conversion
// driven by the cw extinction leak adds at the intensity level, so the
// off-pulse plateau is exactly C*leak + dark, with leak = extinction under
// intensity_ratio leakage and extinction^2 under field_squared.
SampledSignal click_rate_profile(const PulseProfile& pulse, const FilterChain& chain,
                                 const ApdModel& apd, std::size_t n_samples = 500,
                                 double dt_ns = 1.0,
                                 LeakageMode leakage = LeakageMode::intensity_ratio);

// Inhomogeneous Poisson click generation: one RNG stream per pulse (stream i
// derived from the master seed), per-bin Poisson draws with mean
// rate(t)*dt, uniform placement inside the bin. Deterministic given seed.
std::vector<ClickRecord> simulate_clicks(const ExperimentTiming& timing,
                                         const SampledSignal& rate_profile,
                                         std::int64_t n_pulses, std::uint64_t seed);

// Histogram click delays over [0, window_ns) with the given bin width
// (which must divide the window). When normalize is set, also attaches the
// background-normalized view; the background level is the mean count of the
// bins starting at or after background_start_ns (default: last quarter).
DelayHistogram histogram_clicks(const std::vector<ClickRecord>& clicks, double bin_width_ns,
                                double window_ns, double total_live_time_s = 0.0,
                                bool normalize = true,
                                std::optional<double> background_start_ns = std::nullopt);

// Least-squares scale between a background-subtracted histogram and a model
// rate profile, mirroring the "scaled vertically by the same factor" model
// comparison. The same background region is removed from both sides.
ScaleFitResult fit_scale_to_model(const DelayHistogram& hist, const SampledSignal& model,
                                  std::optional<double> background_start_ns = std::nullopt);

// Keep clicks with |delay - center| <= length/2 (heralds that qualify
// homodyne windows).
std::vector<ClickRecord> gate_clicks(const std::vector<ClickRecord>& clicks,
                                     double window_center_ns, double window_length_ns);

}  // namespace timegate
