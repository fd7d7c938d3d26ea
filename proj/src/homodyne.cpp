#include "timegate/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "timegate/numerics.hpp"
#include "timegate/rng.hpp"
#include "timegate/tomography.hpp"

namespace timegate {

namespace {

constexpr double vacuum_variance = 0.5;

// Inverse-CDF table for one Fock marginal P_n on [-x_max, x_max].
struct QuadratureTable {
    std::vector<double> x;
    std::vector<double> cdf;  // normalized to end at 1
};

QuadratureTable build_table(int n) {
    constexpr double x_max = 8.0;
    constexpr std::size_t n_points = 8193;
    QuadratureTable table;
    table.x.resize(n_points);
    table.cdf.resize(n_points);
    const double h = 2.0 * x_max / static_cast<double>(n_points - 1);
    double prev = fock_marginal(n, -x_max);
    table.x[0] = -x_max;
    table.cdf[0] = 0.0;
    for (std::size_t i = 1; i < n_points; ++i) {
        const double xi = -x_max + h * static_cast<double>(i);
        const double cur = fock_marginal(n, xi);
        table.x[i] = xi;
        table.cdf[i] = table.cdf[i - 1] + 0.5 * (prev + cur) * h;
        prev = cur;
    }
    const double total = table.cdf.back();
    for (double& c : table.cdf) c /= total;
    return table;
}

const QuadratureTable& table_for(int n) {
    static const std::vector<QuadratureTable> tables = [] {
        std::vector<QuadratureTable> t;
        for (int k = 0; k <= fock_cutoff; ++k) t.push_back(build_table(k));
        return t;
    }();
    return tables[static_cast<std::size_t>(n)];
}

double invert_cdf(const QuadratureTable& table, double u) {
    const auto it = std::lower_bound(table.cdf.begin(), table.cdf.end(), u);
    if (it == table.cdf.begin()) return table.x.front();
    if (it == table.cdf.end()) return table.x.back();
    const auto idx = static_cast<std::size_t>(it - table.cdf.begin());
    const double c0 = table.cdf[idx - 1], c1 = table.cdf[idx];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    return table.x[idx - 1] + frac * (table.x[idx] - table.x[idx - 1]);
}

}  // namespace

TargetState::TargetState() { populations[0] = 1.0; }

TargetState::TargetState(std::span<const double> rho) {
    if (rho.size() > populations.size())
        throw UnsupportedOrder("TargetState: more than 7 populations");
    double sum = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(rho[i] >= 0.0)) throw ValidationError("TargetState: populations must be >= 0");
        populations[i] = rho[i];
        sum += rho[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("TargetState: populations must sum to 1 within 1e-12");
}

TargetState TargetState::normalized(std::span<const double> rho) {
    if (rho.size() > static_cast<std::size_t>(fock_cutoff + 1))
        throw UnsupportedOrder("TargetState: more than 7 populations");
    double sum = 0.0;
    for (const double r : rho) {
        if (!(r >= 0.0)) throw ValidationError("TargetState: populations must be >= 0");
        sum += r;
    }
    if (!(sum > 0.0)) throw ValidationError("TargetState: populations sum to zero");
    TargetState state;
    state.populations.fill(0.0);
    for (std::size_t i = 0; i < rho.size(); ++i) state.populations[i] = rho[i] / sum;
    return state;
}

double TargetState::mean_photon_number() const {
    double n_bar = 0.0;
    for (std::size_t n = 1; n < populations.size(); ++n)
        n_bar += static_cast<double>(n) * populations[n];
    return n_bar;
}

double TargetState::quadrature_variance() const { return vacuum_variance + mean_photon_number(); }

ModeFunction::ModeFunction(std::vector<double> v) : values(std::move(v)) {
    if (values.empty()) throw InvalidArgument("ModeFunction: empty");
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = values[i] * values[i];
    if (std::abs(pairwise_sum(sq) - 1.0) > 1e-12)
        throw InvalidArgument("ModeFunction: not unit-norm");
}

ModeFunction ModeFunction::normalized(std::vector<double> v) {
    if (v.empty()) throw InvalidArgument("ModeFunction: empty");
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    const double norm = std::sqrt(pairwise_sum(sq));
    if (!(norm > 0.0)) throw ZeroMode("ModeFunction: zero norm");
    for (double& x : v) x /= norm;
    // One reorthogonalization pass keeps the norm within 1e-12 strictly.
    std::vector<double> sq2(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq2[i] = v[i] * v[i];
    const double norm2 = std::sqrt(pairwise_sum(sq2));
    for (double& x : v) x /= norm2;
    return ModeFunction(std::move(v));
}

double ModeFunction::fidelity(const ModeFunction& a, const ModeFunction& b) {
    if (a.values.size() != b.values.size())
        throw InvalidArgument("ModeFunction::fidelity: length mismatch");
    std::vector<double> prod(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) prod[i] = a.values[i] * b.values[i];
    const double overlap = pairwise_sum(prod);
    return overlap * overlap;
}

ModeFunction optimal_mode(const PulseProfile& pulse, const CavityFilter& opo, double delay_ns,
                          std::size_t n_samples, double dt_ns) {
    if (!(delay_ns >= 0.0)) throw InvalidArgument("optimal_mode: delay must be >= 0");
    if (n_samples == 0) throw InvalidArgument("optimal_mode: empty window");
    const double window_end = dt_ns * static_cast<double>(n_samples - 1);
    const double pulse_end = delay_ns + pulse.duration_ns + pulse.rise_ns;
    if (delay_ns > window_end || pulse_end < 0.0)
        throw ZeroMode("optimal_mode: pulse does not overlap the window");
    const SampledSignal envelope = sample_pulse(pulse, n_samples, dt_ns, delay_ns);
    const SampledSignal filtered = filter_signal(envelope, FilterChain({opo}));
    return ModeFunction::normalized(filtered.samples);
}

double sample_mode_quadrature(const TargetState& state, Rng& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    int n = 0;
    for (int k = 0; k <= fock_cutoff; ++k) {
        cumulative += state.populations[static_cast<std::size_t>(k)];
        if (u < cumulative) {
            n = k;
            break;
        }
        n = k;  // fp slack: u may exceed the final cumulative by ~1e-16
    }
    return invert_cdf(table_for(n), rng.uniform());
}

TraceWindow synthesize_window(double x, const ModeFunction& mode, Rng& rng) {
    const std::size_t len = mode.values.size();
    TraceWindow window;
    window.samples.resize(len);
    const double sigma = std::sqrt(vacuum_variance);
    for (double& s : window.samples) s = rng.normal(0.0, sigma);
    std::vector<double> prod(len);
    for (std::size_t i = 0; i < len; ++i) prod[i] = window.samples[i] * mode.values[i];
    const double p = pairwise_sum(prod);
    for (std::size_t i = 0; i < len; ++i) window.samples[i] += (x - p) * mode.values[i];
    return window;
}

TraceSet generate_trace_set(const TargetState& state, const ModeFunction& true_mode,
                            std::size_t n_windows, bool vacuum, std::uint64_t seed,
                            double gate_center_ns, double gate_length_ns,
                            double background_fraction, const ElectronicNoise& noise,
                            double dt_ns) {
    if (n_windows == 0) throw InvalidArgument("generate_trace_set: n_windows must be > 0");
    if (!(background_fraction >= 0.0 && background_fraction <= 1.0))
        throw InvalidArgument("generate_trace_set: background fraction must be in [0, 1]");
    const std::size_t len = true_mode.values.size();

    TraceSet set;
    set.vacuum = vacuum;
    set.dt_ns = dt_ns;
    set.meta.seed = seed;
    set.windows.reserve(n_windows);

    const double sigma = std::sqrt(vacuum_variance);
    const double noise_scale = [&] {
        if (noise.rms <= 0.0) return 0.0;
        const double a = std::exp(-two_pi * noise.corner_mhz * 1e-3 * dt_ns);
        const double var = 1.0 - 2.0 * (1.0 - a) + (1.0 - a) / (1.0 + a);
        return noise.rms / std::sqrt(var);
    }();
    const double a_noise = std::exp(-two_pi * noise.corner_mhz * 1e-3 * dt_ns);

    for (std::size_t w = 0; w < n_windows; ++w) {
        Rng rng = Rng::stream(seed, w);
        const double qualifier =
            gate_center_ns + (rng.uniform() - 0.5) * gate_length_ns;
        TraceWindow window;
        if (vacuum) {
            window.samples.resize(len);
            for (double& s : window.samples) s = rng.normal(0.0, sigma);
        } else {
            const bool background_herald =
                background_fraction > 0.0 && rng.uniform() < background_fraction;
            if (background_herald) {
                window.samples.resize(len);
                for (double& s : window.samples) s = rng.normal(0.0, sigma);
            } else {
                const double x = sample_mode_quadrature(state, rng);
                window = synthesize_window(x, true_mode, rng);
            }
        }
        if (noise_scale > 0.0) {
            // white noise minus its low-pass: band-limited to high frequencies
            double lp = 0.0;
            for (double& s : window.samples) {
                const double e = rng.normal();
                lp = a_noise * lp + (1.0 - a_noise) * e;
                s += noise_scale * (e - lp);
            }
        }
        window.qualifier_delay_ns = qualifier;
        set.windows.push_back(std::move(window));
    }
    return set;
}

}  // namespace timegate
