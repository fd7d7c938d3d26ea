#pragma once

#include <cstddef>
#include <vector>

#include "timegate/errors.hpp"

namespace timegate {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Pump pulse envelope: square pulse with linear rise/fall ramps sitting on a
// constant leakage floor. Field amplitude, flat top normalized to 1.
struct PulseProfile {
    double duration_ns = 49.0;  // flat-top end, measured from the pulse front at t = 0
    double rise_ns = 5.0;       // linear ramp length, same for rise and fall
    double extinction = 0.0;    // leakage floor in [0, 1)

    PulseProfile() = default;
    PulseProfile(double duration, double rise, double ext);

    // Envelope value at time t (ns). Total function:
    //   floor | ramp up on [0, rise] | 1 on [rise, duration]
    //   | ramp down on [duration, duration + rise] | floor.
    double value(double t_ns) const;
};

double evaluate_pulse(const PulseProfile& pulse, double t_ns);

// Single-pole cavity field filter. kappa is the field decay rate in rad/ns,
// i.e. half the cavity (FWHM) bandwidth in angular units.
struct CavityFilter {
    double kappa_rad_per_ns = 0.0;

    CavityFilter() = default;
    explicit CavityFilter(double kappa);

    // kappa/2pi given in MHz (the half-width as an ordinary frequency).
    static CavityFilter from_half_width_mhz(double mhz);
    // Full cavity bandwidth in MHz; kappa is half of it.
    static CavityFilter from_full_width_mhz(double mhz);
};

// Causal unit-area impulse response kappa*exp(-kappa t); the squared
// magnitude of its frequency response is a Lorentzian of half-width kappa.
double impulse_response(const CavityFilter& filter, double t_ns);

// Ordered cascade of cavity filters (the frequency responses multiply).
struct FilterChain {
    std::vector<CavityFilter> filters;

    FilterChain() = default;
    explicit FilterChain(std::vector<CavityFilter> f);
};

// Uniformly sampled real signal.
struct SampledSignal {
    double start_time_ns = 0.0;
    double dt_ns = 1.0;
    std::vector<double> samples;

    SampledSignal() = default;
    SampledSignal(double start, double dt, std::vector<double> s);

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t i) const { return start_time_ns + dt_ns * static_cast<double>(i); }
};

// Sample a pulse envelope onto a grid; the pulse front sits at t = offset_ns.
SampledSignal sample_pulse(const PulseProfile& pulse, std::size_t n_samples, double dt_ns,
                           double offset_ns = 0.0, double start_time_ns = 0.0);

// Discrete cascade convolution. Each filter is applied as the exact one-pole
// recursion y[n] = a*y[n-1] + (1-a)*x[n], a = exp(-kappa*dt), which is the
// exact filter state at t_n when x[n] is the input held over (t_{n-1}, t_n].
// Unit DC gain; zero initial state. Throws GridTooCoarse when kappa*dt >= 0.5
// for any filter.
SampledSignal filter_signal(const SampledSignal& input, const FilterChain& chain);

// Pointwise squared magnitude.
SampledSignal intensity(const SampledSignal& signal);

}  // namespace timegate
