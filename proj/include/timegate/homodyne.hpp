#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "timegate/rng.hpp"
#include "timegate/signal.hpp"

namespace timegate {

// Highest Fock order carried anywhere in the toolkit.
inline constexpr int fock_cutoff = 6;

// Diagonal target state: photon-number populations rho_00..rho_66.
struct TargetState {
    std::array<double, fock_cutoff + 1> populations{};

    TargetState();  // vacuum
    explicit TargetState(std::span<const double> rho);

    // Accepts any nonnegative vector with positive sum and rescales it to
    // the simplex (handy for quoted diagonals that sum to slightly below 1).
    static TargetState normalized(std::span<const double> rho);

    double mean_photon_number() const;
    // Quadrature variance of the phase-averaged mixture, 1/2 + <n>.
    double quadrature_variance() const;
};

// Unit-norm discrete temporal mode on the window grid.
struct ModeFunction {
    std::vector<double> values;

    ModeFunction() = default;
    explicit ModeFunction(std::vector<double> v);  // must already be unit-norm

    static ModeFunction normalized(std::vector<double> v);

    // |<a, b>|^2 overlap between unit-norm modes.
    static double fidelity(const ModeFunction& a, const ModeFunction& b);
};

// One sampled homodyne window plus the delay of the click that qualified it.
struct TraceWindow {
    std::vector<double> samples;
    double qualifier_delay_ns = 0.0;
};

struct TraceSetMeta {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

struct TraceSet {
    std::vector<TraceWindow> windows;
    bool vacuum = false;
    double dt_ns = 1.0;
    TraceSetMeta meta;

    std::size_t n_windows() const { return windows.size(); }
    std::size_t window_length() const { return windows.empty() ? 0 : windows[0].samples.size(); }
};

// Optional additive band-limited detector noise: white noise minus its
// one-pole low-pass at corner_mhz, scaled to the given per-sample rms. Gives
// the analysis low-pass something real to remove in integration tests.
struct ElectronicNoise {
    double rms = 0.0;
    double corner_mhz = 50.0;
};

// The approximate optimal temporal mode: the pulse envelope filtered by the
// OPO cavity, delayed by the optical/electronic path offset, restricted to
// the window and unit-normalized.
ModeFunction optimal_mode(const PulseProfile& pulse, const CavityFilter& opo, double delay_ns,
                          std::size_t n_samples = 500, double dt_ns = 1.0);

// Draw one quadrature from the phase-averaged mixture marginal
// P(x) = sum_n rho_nn P_n(x) (vacuum variance 1/2 convention): the Fock
// order is drawn from the populations, then x by inverse-CDF lookup.
double sample_mode_quadrature(const TargetState& state, Rng& rng);

// Embed a known quadrature x into a synthetic window: white vacuum noise in
// every temporal mode, with the component along `mode` replaced so the
// projection returns exactly x.
TraceWindow synthesize_window(double x, const ModeFunction& mode, Rng& rng);

// Generate a full trace set; per-window RNG streams derived from the seed,
// qualifier delays uniform in the acceptance window. Windows heralded by
// background clicks (fraction background_fraction) carry vacuum instead of
// the target state.
TraceSet generate_trace_set(const TargetState& state, const ModeFunction& true_mode,
                            std::size_t n_windows, bool vacuum, std::uint64_t seed,
                            double gate_center_ns = 0.0, double gate_length_ns = 40.0,
                            double background_fraction = 0.0,
                            const ElectronicNoise& noise = {}, double dt_ns = 1.0);

}  // namespace timegate
