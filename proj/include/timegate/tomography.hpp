#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "timegate/homodyne.hpp"

namespace timegate {

// Per-sample noise variance across windows, normalized to the vacuum level.
struct VarianceTrace {
    std::vector<double> values;
    std::size_t n_windows = 0;
    double dt_ns = 1.0;
};

// Projected, vacuum-normalized quadrature points.
struct QuadratureSet {
    std::vector<double> points;
    double vacuum_scale = 1.0;  // factor applied to bring vacuum variance to 1/2

    double variance() const;
};

// Unit-area histogram of quadrature points.
struct MarginalHistogram {
    std::vector<double> bin_centers;
    std::vector<double> density;
    double bin_width = 0.0;
};

// Fitted photon-number populations rho_00..rho_66 (simplex-constrained).
struct DiagonalDensityMatrix {
    std::array<double, fock_cutoff + 1> rho{};

    DiagonalDensityMatrix() = default;
    explicit DiagonalDensityMatrix(std::span<const double> values);
};

struct EmOptions {
    double tol = 1e-9;            // max population change per iteration
    std::size_t max_iter = 100000;
    std::size_t min_points = 1000;
    std::optional<std::array<double, fock_cutoff + 1>> initial;  // default: uniform
};

struct EmDiagnostics {
    std::size_t iterations = 0;
    bool converged = false;
    double final_log_likelihood = 0.0;
    std::vector<double> log_likelihood_history;  // one entry per iteration
    std::vector<double> simplex_sum_drift;       // |sum(rho) - 1| per iteration
};

struct FockFitResult {
    DiagonalDensityMatrix rho;
    EmDiagnostics diagnostics;
};

// rho-weighted mixture marginal sum_n rho_n P_n(x).
double mixture_density(const DiagonalDensityMatrix& rho, double x);

// Per-sample variance over the signal windows divided by the per-sample
// variance over the vacuum windows.
VarianceTrace variance_trace(const TraceSet& signal_set, const TraceSet& vacuum_set);

// Zero-phase (forward-backward) one-pole smoothing with -3 dB of the
// combined pass at `cutoff_mhz`; DC is preserved exactly.
VarianceTrace lowpass(const VarianceTrace& trace, double cutoff_mhz);

// Invert the variance identity trace = 1 + 2<n>psi^2: psi_i proportional to
// sqrt(max(trace_i - 1, 0)), unit-normalized, taken non-negative. Requires a
// peak excess above the statistical noise floor of the trace (margin
// 2/sqrt(n_windows), about four sigma of the low-passed trace noise).
ModeFunction estimate_mode_from_variance(const VarianceTrace& trace);

// Project each window onto the mode and rescale so the vacuum set's
// projected variance is exactly 1/2.
QuadratureSet project(const TraceSet& set, const ModeFunction& mode, const TraceSet& vacuum_set);

// Phase-averaged Fock-state quadrature marginal
// P_n(x) = H_n(x)^2 exp(-x^2) / (2^n n! sqrt(pi)), n = 0..6.
double fock_marginal(int n, double x);

// Maximum-likelihood fit of the populations over the 7-simplex by
// expectation-maximization on the unbinned points.
FockFitResult fit_fock_mixture(const QuadratureSet& q, const EmOptions& options = {});

// The binned least-squares alternative (the straightforward reading of a
// curve fit to the marginal): projected-gradient NNLS on the simplex against
// the histogram densities. Diagnostics-oriented; the EM fit is primary.
DiagonalDensityMatrix fit_fock_mixture_binned(const QuadratureSet& q, std::size_t n_bins = 61,
                                              double x_min = -4.5, double x_max = 4.5);

MarginalHistogram marginal_histogram(const QuadratureSet& q, std::size_t n_bins = 61,
                                     double x_min = -4.5, double x_max = 4.5);

// W(0,0) = sum_n (-1)^n rho_nn / pi. The span overload evaluates the
// alternating sum for any diagonal vector (no simplex requirement).
double wigner_center(std::span<const double> rho);
double wigner_center(const DiagonalDensityMatrix& rho);

}  // namespace timegate
