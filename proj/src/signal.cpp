#include "timegate/signal.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace timegate {

PulseProfile::PulseProfile(double duration, double rise, double ext)
    : duration_ns(duration), rise_ns(rise), extinction(ext) {
    if (!(duration_ns > 0.0)) throw InvalidArgument("PulseProfile: duration must be > 0");
    if (!(rise_ns >= 0.0)) throw InvalidArgument("PulseProfile: rise time must be >= 0");
    if (!(extinction >= 0.0 && extinction < 1.0))
        throw InvalidArgument("PulseProfile: extinction must be in [0, 1)");
}

double PulseProfile::value(double t_ns) const {
    const double floor = extinction;
    if (t_ns < 0.0 || t_ns > duration_ns + rise_ns) return floor;
    if (t_ns < rise_ns)
        return floor + (1.0 - floor) * (t_ns / rise_ns);
    if (t_ns <= duration_ns) return 1.0;
    // falling ramp on [duration, duration + rise]
    return 1.0 - (1.0 - floor) * ((t_ns - duration_ns) / rise_ns);
}

double evaluate_pulse(const PulseProfile& pulse, double t_ns) { return pulse.value(t_ns); }

CavityFilter::CavityFilter(double kappa) : kappa_rad_per_ns(kappa) {
    if (!(kappa_rad_per_ns > 0.0)) throw InvalidArgument("CavityFilter: kappa must be > 0");
}

CavityFilter CavityFilter::from_half_width_mhz(double mhz) {
    return CavityFilter(two_pi * mhz * 1e-3);
}

CavityFilter CavityFilter::from_full_width_mhz(double mhz) {
    return CavityFilter(two_pi * 0.5 * mhz * 1e-3);
}

double impulse_response(const CavityFilter& filter, double t_ns) {
    if (t_ns < 0.0) return 0.0;
    const double k = filter.kappa_rad_per_ns;
    return k * std::exp(-k * t_ns);
}

FilterChain::FilterChain(std::vector<CavityFilter> f) : filters(std::move(f)) {
    if (filters.empty()) throw InvalidArgument("FilterChain: must contain at least one filter");
}

SampledSignal::SampledSignal(double start, double dt, std::vector<double> s)
    : start_time_ns(start), dt_ns(dt), samples(std::move(s)) {
    if (!(dt_ns > 0.0)) throw InvalidArgument("SampledSignal: dt must be > 0");
    if (samples.empty()) throw InvalidArgument("SampledSignal: must contain at least one sample");
}

SampledSignal sample_pulse(const PulseProfile& pulse, std::size_t n_samples, double dt_ns,
                           double offset_ns, double start_time_ns) {
    std::vector<double> samples(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = start_time_ns + dt_ns * static_cast<double>(i);
        samples[i] = pulse.value(t - offset_ns);
    }
    return SampledSignal(start_time_ns, dt_ns, std::move(samples));
}

SampledSignal filter_signal(const SampledSignal& input, const FilterChain& chain) {
    if (chain.filters.empty()) throw InvalidArgument("filter_signal: empty chain");
    for (const auto& f : chain.filters) {
        if (f.kappa_rad_per_ns * input.dt_ns >= 0.5)
            throw GridTooCoarse("filter_signal: kappa*dt = " +
                                std::to_string(f.kappa_rad_per_ns * input.dt_ns) +
                                " >= 0.5; refine the grid");
    }
    SampledSignal out = input;
    for (const auto& f : chain.filters) {
        const double a = std::exp(-f.kappa_rad_per_ns * input.dt_ns);
        const double b = 1.0 - a;
        double y = 0.0;
        for (double& s : out.samples) {
            y = a * y + b * s;
            s = y;
        }
    }
    return out;
}

SampledSignal intensity(const SampledSignal& signal) {
    SampledSignal out = signal;
    for (double& s : out.samples) s *= s;
    return out;
}

}  // namespace timegate
