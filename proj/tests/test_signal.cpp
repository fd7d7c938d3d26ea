#include <doctest.h>

#include <cmath>
#include <vector>

#include "testutil.hpp"
#include "timegate/rng.hpp"
#include "timegate/signal.hpp"

using namespace timegate;

TEST_SUITE_BEGIN("signal");

TEST_CASE("pulse profile: trapezoid on an extinction floor") {
    const PulseProfile paper(49.0, 5.0, 0.015);
    CHECK(paper.value(25.0) == doctest::Approx(1.0));
    CHECK(paper.value(-10.0) == doctest::Approx(0.015));
    CHECK(paper.value(100.0) == doctest::Approx(0.015));
    // midpoint of the rise ramp
    CHECK(paper.value(2.5) == doctest::Approx(0.015 + 0.985 * 0.5));
    // midpoint of the fall ramp
    CHECK(paper.value(51.5) == doctest::Approx(1.0 - 0.985 * 0.5));

    const PulseProfile square(49.0, 0.0, 0.0);
    for (double t : {0.1, 1.0, 25.0, 48.9}) CHECK(square.value(t) == 1.0);
    for (double t : {-0.1, 49.1, 1000.0}) CHECK(square.value(t) == 0.0);

    // value always within [extinction, 1]
    for (double t = -20.0; t < 80.0; t += 0.37) {
        CHECK(paper.value(t) >= 0.015);
        CHECK(paper.value(t) <= 1.0);
    }

    CHECK_THROWS_AS(PulseProfile(-1.0, 5.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(PulseProfile(49.0, -1.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(PulseProfile(49.0, 5.0, 1.0), InvalidArgument);
}

TEST_CASE("impulse response: causal unit-area exponential") {
    const CavityFilter fc = CavityFilter::from_half_width_mhz(12.0);
    CHECK(fc.kappa_rad_per_ns == doctest::Approx(0.0753982236861550).epsilon(1e-12));
    CHECK(impulse_response(fc, 0.0) == doctest::Approx(fc.kappa_rad_per_ns));
    CHECK(impulse_response(fc, -1.0) == 0.0);

    // frozen from the closed form 0.1*exp(-1)
    const CavityFilter k01(0.1);
    CHECK(impulse_response(k01, 10.0) == doctest::Approx(0.036787944117144235).epsilon(1e-14));

    // unit area by quadrature
    const double area = testutil::simpson([&](double t) { return impulse_response(fc, t); }, 0.0,
                                          400.0, 40000);
    CHECK(area == doctest::Approx(1.0).epsilon(1e-6));

    // OPO: gamma/2pi = 4.4 MHz full bandwidth, kappa = gamma/2
    const CavityFilter opo = CavityFilter::from_full_width_mhz(4.4);
    CHECK(opo.kappa_rad_per_ns == doctest::Approx(two_pi * 2.2e-3).epsilon(1e-12));
}

TEST_CASE("filter_signal: step response against the analytic curve") {
    const CavityFilter fc = CavityFilter::from_half_width_mhz(12.0);
    const double kappa = fc.kappa_rad_per_ns;
    const FilterChain chain({fc});

    // A step that turns on at t = 0: the sample at t = 0 carries the
    // preceding interval, where the input was still off.
    std::vector<double> samples(500, 1.0);
    samples[0] = 0.0;
    const SampledSignal step(0.0, 1.0, samples);
    const SampledSignal out = filter_signal(step, chain);
    double max_err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double analytic = 1.0 - std::exp(-kappa * out.time_at(i));
        max_err = std::max(max_err, std::abs(out.samples[i] - analytic));
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("filter_signal: onset misalignment error is O(dt)") {
    // Step onset half a sample inside the first interval: the sampled
    // sequence cannot represent it, so the output shows the worst-case
    // first-order error, which halves with dt.
    const CavityFilter fc = CavityFilter::from_half_width_mhz(12.0);
    const double kappa = fc.kappa_rad_per_ns;
    auto onset_error = [&](double dt) {
        const std::size_t n = static_cast<std::size_t>(500.0 / dt);
        std::vector<double> samples(n, 1.0);  // naive sampling of u(t - dt/2)
        const SampledSignal step(0.0, dt, samples);
        const SampledSignal out = filter_signal(step, FilterChain({fc}));
        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = out.time_at(i) + 0.5 * dt;  // true onset mid-interval
            const double analytic = 1.0 - std::exp(-kappa * t);
            max_err = std::max(max_err, std::abs(out.samples[i] - analytic));
        }
        return max_err;
    };
    const double e1 = onset_error(1.0);
    const double e2 = onset_error(0.5);
    const double e3 = onset_error(0.25);
    CHECK(e2 / e1 == doctest::Approx(0.5).epsilon(0.1));
    CHECK(e3 / e2 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("filter_signal: zeros, DC gain, coarse grid error") {
    const FilterChain chain({CavityFilter::from_half_width_mhz(12.0)});
    const SampledSignal zeros(0.0, 1.0, std::vector<double>(100, 0.0));
    for (const double s : filter_signal(zeros, chain).samples) CHECK(s == 0.0);

    const SampledSignal ones(0.0, 1.0, std::vector<double>(2000, 1.0));
    const auto dc = filter_signal(ones, chain);
    CHECK(std::abs(dc.samples.back() - 1.0) < 1e-6);

    const SampledSignal coarse(0.0, 10.0, std::vector<double>(10, 1.0));
    CHECK_THROWS_AS(filter_signal(coarse, chain), GridTooCoarse);
}

TEST_CASE("filter_signal: paper pulse through OPO and FC has a delayed peak and slow tail") {
    const PulseProfile pulse(49.0, 5.0, 0.015);
    const FilterChain chain(
        {CavityFilter::from_full_width_mhz(4.4), CavityFilter::from_half_width_mhz(12.0)});
    const SampledSignal envelope = sample_pulse(pulse, 500, 1.0);
    const SampledSignal out = filter_signal(envelope, chain);

    std::size_t peak = 0;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.samples[i] > out.samples[peak]) peak = i;
    // peak delayed past the end of the optical pulse
    CHECK(out.time_at(peak) > 49.0);
    CHECK(out.time_at(peak) < 120.0);
    // decay tail of tens of ns: after the pulse the response is a clean
    // exponential with the OPO rate (the slowest pole)
    const double k_opo = CavityFilter::from_full_width_mhz(4.4).kappa_rad_per_ns;
    const double floor = 0.015;
    const double r150 = out.samples[200] - floor;
    const double r250 = out.samples[300] - floor;
    CHECK(r250 / r150 == doctest::Approx(std::exp(-k_opo * 100.0)).epsilon(0.02));
}

TEST_CASE("intensity: pointwise square") {
    const SampledSignal s(0.0, 1.0, {0.0, 1.0, -2.0});
    const auto sq = intensity(s);
    CHECK(sq.samples[0] == 0.0);
    CHECK(sq.samples[1] == 1.0);
    CHECK(sq.samples[2] == 4.0);

    const SampledSignal ones(0.0, 1.0, std::vector<double>(16, 1.0));
    for (const double v : intensity(ones).samples) CHECK(v == 1.0);

    // compose with the analytic step response
    const CavityFilter fc(0.05);
    std::vector<double> step(400, 1.0);
    step[0] = 0.0;
    const auto resp = intensity(filter_signal(SampledSignal(0.0, 1.0, step), FilterChain({fc})));
    for (std::size_t i = 0; i < resp.size(); i += 37) {
        const double a = 1.0 - std::exp(-0.05 * static_cast<double>(i));
        CHECK(resp.samples[i] == doctest::Approx(a * a).epsilon(1e-10));
    }
}

TEST_CASE("properties: linearity, causality, cascade order invariance") {
    Rng rng(12345);
    const FilterChain chain({CavityFilter(0.02), CavityFilter(0.08), CavityFilter(0.13)});

    std::vector<double> xv(300), yv(300);
    for (auto& v : xv) v = rng.normal();
    for (auto& v : yv) v = rng.normal();
    const SampledSignal x(0.0, 1.0, xv), y(0.0, 1.0, yv);

    SUBCASE("linearity") {
        const double a = 1.7, b = -0.4;
        std::vector<double> combo(300);
        for (std::size_t i = 0; i < 300; ++i) combo[i] = a * xv[i] + b * yv[i];
        const auto lhs = filter_signal(SampledSignal(0.0, 1.0, combo), chain);
        const auto fx = filter_signal(x, chain), fy = filter_signal(y, chain);
        for (std::size_t i = 0; i < 300; ++i) {
            const double rhs = a * fx.samples[i] + b * fy.samples[i];
            CHECK(lhs.samples[i] == doctest::Approx(rhs).epsilon(1e-9));
        }
    }

    SUBCASE("causality: prepending zeros shifts the response") {
        const auto direct = filter_signal(x, chain);
        std::vector<double> padded(50, 0.0);
        padded.insert(padded.end(), xv.begin(), xv.end());
        const auto shifted = filter_signal(SampledSignal(0.0, 1.0, padded), chain);
        for (std::size_t i = 0; i < 50; ++i) CHECK(shifted.samples[i] == 0.0);
        for (std::size_t i = 0; i < 300; ++i)
            CHECK(shifted.samples[50 + i] == doctest::Approx(direct.samples[i]).epsilon(1e-12));
    }

    SUBCASE("cascade order invariance") {
        const FilterChain permuted({CavityFilter(0.13), CavityFilter(0.02), CavityFilter(0.08)});
        const auto f1 = filter_signal(x, chain), f2 = filter_signal(x, permuted);
        for (std::size_t i = 0; i < 300; ++i)
            CHECK(std::abs(f1.samples[i] - f2.samples[i]) < 1e-9);
    }
}

TEST_SUITE_END();
