#include "timegate/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "timegate/numerics.hpp"

namespace timegate {

namespace {

constexpr double density_floor = 1e-300;

// Per-sample-index unbiased variance across windows.
std::vector<double> per_sample_variance(const TraceSet& set) {
    const std::size_t len = set.window_length();
    const std::size_t n = set.n_windows();
    std::vector<double> column(n);
    std::vector<double> variance(len);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t w = 0; w < n; ++w) column[w] = set.windows[w].samples[i];
        variance[i] = sample_variance(column);
    }
    return variance;
}

// Simplex projection (Held/Duchi): Euclidean projection onto
// {rho >= 0, sum rho = 1}.
std::array<double, fock_cutoff + 1> project_simplex(std::array<double, fock_cutoff + 1> v) {
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    int support = 0;
    for (int k = 0; k < static_cast<int>(sorted.size()); ++k) {
        cumulative += sorted[static_cast<std::size_t>(k)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) {
            theta = candidate;
            support = k + 1;
        }
    }
    (void)support;
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

}  // namespace

double QuadratureSet::variance() const { return sample_variance(points); }

DiagonalDensityMatrix::DiagonalDensityMatrix(std::span<const double> values) {
    if (values.size() > rho.size())
        throw UnsupportedOrder("DiagonalDensityMatrix: more than 7 diagonals");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0))
            throw ValidationError("DiagonalDensityMatrix: populations must be >= 0");
        rho[i] = values[i];
        sum += values[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("DiagonalDensityMatrix: populations must sum to 1 within 1e-9");
}

double mixture_density(const DiagonalDensityMatrix& rho, double x) {
    double density = 0.0;
    for (int n = 0; n <= fock_cutoff; ++n)
        density += rho.rho[static_cast<std::size_t>(n)] * fock_marginal(n, x);
    return density;
}

VarianceTrace variance_trace(const TraceSet& signal_set, const TraceSet& vacuum_set) {
    if (signal_set.n_windows() < 2 || vacuum_set.n_windows() < 2)
        throw InsufficientData("variance_trace: need at least 2 windows in each set");
    if (signal_set.window_length() != vacuum_set.window_length())
        throw InvalidArgument("variance_trace: window length mismatch");

    const auto signal_var = per_sample_variance(signal_set);
    const auto vacuum_var = per_sample_variance(vacuum_set);

    VarianceTrace trace;
    trace.n_windows = signal_set.n_windows();
    trace.dt_ns = signal_set.dt_ns;
    trace.values.resize(signal_var.size());
    for (std::size_t i = 0; i < signal_var.size(); ++i) {
        if (!(vacuum_var[i] > 0.0))
            throw InsufficientData("variance_trace: degenerate vacuum variance");
        trace.values[i] = signal_var[i] / vacuum_var[i];
    }
    return trace;
}

VarianceTrace lowpass(const VarianceTrace& trace, double cutoff_mhz) {
    if (!(cutoff_mhz > 0.0)) throw InvalidArgument("lowpass: cutoff must be > 0");
    if (trace.values.empty()) throw InvalidArgument("lowpass: empty trace");
    // Each pass attenuates power by 1/(1+(f/fp)^2); two passes reach -3 dB
    // at the requested cutoff when fp = cutoff / sqrt(sqrt(2) - 1).
    const double pole_mhz = cutoff_mhz / std::sqrt(std::numbers::sqrt2 - 1.0);
    const double a = std::exp(-two_pi * pole_mhz * 1e-3 * trace.dt_ns);
    const double b = 1.0 - a;

    VarianceTrace out = trace;
    auto& v = out.values;
    double y = v.front();  // start from the boundary value: constants pass unchanged
    for (double& s : v) {
        y = a * y + b * s;
        s = y;
    }
    y = v.back();
    for (std::size_t i = v.size(); i-- > 0;) {
        y = a * y + b * v[i];
        v[i] = y;
    }
    return out;
}

ModeFunction estimate_mode_from_variance(const VarianceTrace& trace) {
    if (trace.values.empty()) throw InvalidArgument("estimate_mode_from_variance: empty trace");
    if (trace.n_windows < 2)
        throw InsufficientData("estimate_mode_from_variance: n_windows not set");
    const double peak = *std::max_element(trace.values.begin(), trace.values.end());
    const double margin = 2.0 / std::sqrt(static_cast<double>(trace.n_windows));
    if (!(peak - 1.0 > margin))
        throw NoSignal("estimate_mode_from_variance: peak excess " + std::to_string(peak - 1.0) +
                       " below noise margin " + std::to_string(margin));
    std::vector<double> mode(trace.values.size());
    for (std::size_t i = 0; i < mode.size(); ++i)
        mode[i] = std::sqrt(std::max(trace.values[i] - 1.0, 0.0));
    return ModeFunction::normalized(std::move(mode));
}

QuadratureSet project(const TraceSet& set, const ModeFunction& mode, const TraceSet& vacuum_set) {
    if (vacuum_set.n_windows() < 2)
        throw InsufficientData("project: need at least 2 vacuum windows");
    const std::size_t len = mode.values.size();
    if (set.window_length() != len || vacuum_set.window_length() != len)
        throw InvalidArgument("project: window length does not match the mode");

    auto project_one = [&](const TraceWindow& w) {
        std::vector<double> prod(len);
        for (std::size_t i = 0; i < len; ++i) prod[i] = w.samples[i] * mode.values[i];
        return pairwise_sum(prod);
    };

    std::vector<double> vacuum_q(vacuum_set.n_windows());
    for (std::size_t w = 0; w < vacuum_q.size(); ++w)
        vacuum_q[w] = project_one(vacuum_set.windows[w]);
    const double vacuum_var = sample_variance(vacuum_q);
    if (!(vacuum_var > 0.0)) throw InsufficientData("project: degenerate vacuum projection");

    QuadratureSet q;
    q.vacuum_scale = std::sqrt(0.5 / vacuum_var);
    q.points.resize(set.n_windows());
    for (std::size_t w = 0; w < q.points.size(); ++w)
        q.points[w] = q.vacuum_scale * project_one(set.windows[w]);
    return q;
}

double fock_marginal(int n, double x) {
    if (n < 0 || n > fock_cutoff)
        throw UnsupportedOrder("fock_marginal: order must be in 0..6, got " + std::to_string(n));
    // Normalized Hermite functions h_k = H_k(x) e^{-x^2/2} / sqrt(2^k k! sqrt(pi)),
    // recurrence h_{k+1} = x sqrt(2/(k+1)) h_k - sqrt(k/(k+1)) h_{k-1}; P_n = h_n^2.
    const double gauss = std::exp(-0.5 * x * x) / std::pow(std::numbers::pi, 0.25);
    double h_prev = 0.0;
    double h = gauss;
    for (int k = 0; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double h_next =
            x * std::sqrt(2.0 / (kk + 1.0)) * h - std::sqrt(kk / (kk + 1.0)) * h_prev;
        h_prev = h;
        h = h_next;
    }
    return h * h;
}

FockFitResult fit_fock_mixture(const QuadratureSet& q, const EmOptions& options) {
    const std::size_t n_points = q.points.size();
    if (n_points < options.min_points)
        throw InsufficientData("fit_fock_mixture: " + std::to_string(n_points) +
                               " points, need at least " + std::to_string(options.min_points));
    const double first = q.points.front();
    bool all_identical = true;
    for (const double x : q.points)
        if (x != first) {
            all_identical = false;
            break;
        }
    if (all_identical) throw Degenerate("fit_fock_mixture: all quadrature points identical");

    constexpr std::size_t n_comp = fock_cutoff + 1;
    // Precompute the component densities once.
    std::vector<double> p(n_points * n_comp);
    for (std::size_t i = 0; i < n_points; ++i) {
        double row_max = 0.0;
        for (std::size_t n = 0; n < n_comp; ++n) {
            const double d = fock_marginal(static_cast<int>(n), q.points[i]);
            p[i * n_comp + n] = d;
            row_max = std::max(row_max, d);
        }
        if (row_max < density_floor)
            throw InvalidArgument("fit_fock_mixture: point " + std::to_string(q.points[i]) +
                                  " outside the supported quadrature range");
    }

    std::array<double, n_comp> rho;
    if (options.initial) {
        rho = *options.initial;
        double sum = 0.0;
        for (const double r : rho) {
            if (!(r >= 0.0)) throw ValidationError("fit_fock_mixture: negative initial weight");
            sum += r;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("fit_fock_mixture: initial weights must sum to 1");
    } else {
        rho.fill(1.0 / static_cast<double>(n_comp));
    }

    FockFitResult result;
    auto& diag = result.diagnostics;
    diag.log_likelihood_history.reserve(256);

    const double inv_n = 1.0 / static_cast<double>(n_points);
    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        std::array<double, n_comp> next{};
        double log_likelihood = 0.0;
        for (std::size_t i = 0; i < n_points; ++i) {
            const double* row = &p[i * n_comp];
            double denom = 0.0;
            for (std::size_t n = 0; n < n_comp; ++n) denom += rho[n] * row[n];
            denom = std::max(denom, density_floor);
            log_likelihood += std::log(denom);
            const double inv_denom = 1.0 / denom;
            for (std::size_t n = 0; n < n_comp; ++n) next[n] += rho[n] * row[n] * inv_denom;
        }
        for (double& r : next) r *= inv_n;

        double drift = 0.0;
        for (const double r : next) drift += r;
        diag.simplex_sum_drift.push_back(std::abs(drift - 1.0));
        diag.log_likelihood_history.push_back(log_likelihood);
        ++diag.iterations;
#ifndef NDEBUG
        if (diag.log_likelihood_history.size() >= 2) {
            const auto& h = diag.log_likelihood_history;
            if (h[h.size() - 1] < h[h.size() - 2] - 1e-9 * std::abs(h[h.size() - 2]))
                throw Error("fit_fock_mixture: log-likelihood decreased");
        }
#endif

        double max_change = 0.0;
        for (std::size_t n = 0; n < n_comp; ++n)
            max_change = std::max(max_change, std::abs(next[n] - rho[n]));
        rho = next;
        if (max_change < options.tol) {
            diag.converged = true;
            break;
        }
    }
    diag.final_log_likelihood =
        diag.log_likelihood_history.empty() ? 0.0 : diag.log_likelihood_history.back();

    // The EM update preserves the simplex up to rounding; renormalize the
    // residual 1e-16-scale drift before constructing the result.
    double sum = 0.0;
    for (const double r : rho) sum += r;
    for (double& r : rho) r /= sum;
    result.rho = DiagonalDensityMatrix(std::span<const double>(rho.data(), rho.size()));
    return result;
}

DiagonalDensityMatrix fit_fock_mixture_binned(const QuadratureSet& q, std::size_t n_bins,
                                              double x_min, double x_max) {
    const MarginalHistogram hist = marginal_histogram(q, n_bins, x_min, x_max);
    constexpr std::size_t n_comp = fock_cutoff + 1;

    // Design matrix: component densities at the bin centers.
    std::vector<double> a(n_bins * n_comp);
    for (std::size_t i = 0; i < n_bins; ++i)
        for (std::size_t n = 0; n < n_comp; ++n)
            a[i * n_comp + n] = fock_marginal(static_cast<int>(n), hist.bin_centers[i]);

    // Lipschitz bound for the gradient of ||A rho - d||^2.
    double frob2 = 0.0;
    for (const double v : a) frob2 += v * v;
    const double step = 1.0 / (2.0 * frob2);

    std::array<double, n_comp> rho;
    rho.fill(1.0 / static_cast<double>(n_comp));
    for (std::size_t iter = 0; iter < 20000; ++iter) {
        std::array<double, n_comp> grad{};
        for (std::size_t i = 0; i < n_bins; ++i) {
            const double* row = &a[i * n_comp];
            double model = 0.0;
            for (std::size_t n = 0; n < n_comp; ++n) model += rho[n] * row[n];
            const double r = model - hist.density[i];
            for (std::size_t n = 0; n < n_comp; ++n) grad[n] += 2.0 * r * row[n];
        }
        std::array<double, n_comp> next;
        for (std::size_t n = 0; n < n_comp; ++n) next[n] = rho[n] - step * grad[n];
        next = project_simplex(next);
        double change = 0.0;
        for (std::size_t n = 0; n < n_comp; ++n) change = std::max(change, std::abs(next[n] - rho[n]));
        rho = next;
        if (change < 1e-12) break;
    }
    return DiagonalDensityMatrix(std::span<const double>(rho.data(), rho.size()));
}

MarginalHistogram marginal_histogram(const QuadratureSet& q, std::size_t n_bins, double x_min,
                                     double x_max) {
    if (n_bins == 0 || !(x_max > x_min)) throw InvalidArgument("marginal_histogram: bad binning");
    if (q.points.empty()) throw EmptyInput("marginal_histogram: no quadrature points");
    MarginalHistogram hist;
    hist.bin_width = (x_max - x_min) / static_cast<double>(n_bins);
    hist.bin_centers.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        hist.bin_centers[i] = x_min + (static_cast<double>(i) + 0.5) * hist.bin_width;
    std::vector<std::uint64_t> counts(n_bins, 0);
    std::uint64_t total_in = 0;
    for (const double x : q.points) {
        if (x < x_min || x >= x_max) continue;
        const auto bin = std::min(static_cast<std::size_t>((x - x_min) / hist.bin_width),
                                  n_bins - 1);
        ++counts[bin];
        ++total_in;
    }
    if (total_in == 0) throw EmptyInput("marginal_histogram: all points outside the range");
    hist.density.resize(n_bins);
    const double norm = 1.0 / (static_cast<double>(total_in) * hist.bin_width);
    for (std::size_t i = 0; i < n_bins; ++i)
        hist.density[i] = static_cast<double>(counts[i]) * norm;
    return hist;
}

double wigner_center(std::span<const double> rho) {
    double alternating = 0.0;
    double sign = 1.0;
    for (const double r : rho) {
        alternating += sign * r;
        sign = -sign;
    }
    return alternating / std::numbers::pi;
}

double wigner_center(const DiagonalDensityMatrix& rho) {
    return wigner_center(std::span<const double>(rho.rho.data(), rho.rho.size()));
}

}  // namespace timegate
