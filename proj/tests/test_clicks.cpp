#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "testutil.hpp"
#include "timegate/clicks.hpp"
#include "timegate/numerics.hpp"

using namespace timegate;

namespace {

const FilterChain paper_chain() {
    return FilterChain(
        {CavityFilter::from_full_width_mhz(4.4), CavityFilter::from_half_width_mhz(12.0)});
}

// Constant rate profile in s^-1 over a window of n samples.
SampledSignal flat_rate(double rate_per_s, std::size_t n, double dt = 1.0) {
    return SampledSignal(0.0, dt, std::vector<double>(n, rate_per_s));
}

}  // namespace

TEST_SUITE_BEGIN("clicks");

TEST_CASE("click_rate_profile: cw anchor reproduces the reference rate") {
    const ApdModel apd;  // 0.4 / 275
    // Continuous pumping: a pulse much longer than the grid, started well
    // before the window so every transient has decayed.
    const PulseProfile cw(1e9, 0.0, 0.0);
    const auto rate = click_rate_profile(cw, paper_chain(), apd, 4000, 1.0);
    CHECK(rate.samples.back() == doctest::Approx(275.0).epsilon(1e-6));
    // time average over the settled second half
    std::vector<double> tail(rate.samples.begin() + 2000, rate.samples.end());
    CHECK(mean(tail) == doctest::Approx(275.0).epsilon(1e-4));
}

TEST_CASE("click_rate_profile: off-pulse plateau per leakage mode") {
    const ApdModel apd;
    const double c = apd.cw_reference_rate_per_s - apd.dark_rate_per_s;
    const double ext = 0.015;
    // amplitude forced to the extinction floor everywhere: pulse far beyond
    // the evaluated window
    const PulseProfile leak_only(10.0, 0.0, ext);
    SUBCASE("field-squared leakage: plateau = C*ext^2 + dark exactly") {
        auto rate = click_rate_profile(leak_only, paper_chain(), apd, 3000, 1.0,
                                       LeakageMode::field_squared);
        const double plateau = c * ext * ext + apd.dark_rate_per_s;
        CHECK(rate.samples.front() == plateau);  // before the pulse response arrives
        CHECK(rate.samples.back() == doctest::Approx(plateau).epsilon(1e-12));
    }
    SUBCASE("intensity-ratio leakage: plateau = C*ext + dark") {
        auto rate = click_rate_profile(leak_only, paper_chain(), apd, 3000, 1.0,
                                       LeakageMode::intensity_ratio);
        const double plateau = c * ext + apd.dark_rate_per_s;
        CHECK(rate.samples.front() == plateau);
        CHECK(rate.samples.back() == doctest::Approx(plateau).epsilon(1e-12));
        // paper's observed background is 3.8 /s; C*ext + dark = 4.5 /s.
        // Reported, not asserted: same order, consistent with intensity-ratio
        // leakage (the field-squared value 0.46 /s is an order low).
        MESSAGE("intensity-leakage background: ", rate.samples.back(), " /s vs observed 3.8 /s");
    }
}

TEST_CASE("click_rate_profile: no pulse, no extinction, no dark -> zero rate") {
    const ApdModel apd{0.0, 275.0};
    const PulseProfile off(1.0, 0.0, 0.0);
    // pulse confined to the first ns; rate beyond the transient is 0
    const auto rate = click_rate_profile(off, paper_chain(), apd, 2000, 1.0);
    CHECK(rate.samples.back() < 1e-10);
}

TEST_CASE("simulate_clicks: zero rate gives zero clicks; Poisson total") {
    const ExperimentTiming timing;
    CHECK(simulate_clicks(timing, flat_rate(0.0, 500), 1000, 7).empty());

    // constant rate: total within 5 sigma of N * r * T
    const double r = 4e5;  // s^-1
    const std::int64_t n_pulses = 10000;
    const auto clicks = simulate_clicks(timing, flat_rate(r, 500), n_pulses, 42);
    const double expected = static_cast<double>(n_pulses) * r * 500e-9;
    CHECK(std::abs(static_cast<double>(clicks.size()) - expected) < 5.0 * std::sqrt(expected));
}

TEST_CASE("simulate_clicks: dispersion test at 1e4 pulses") {
    const ExperimentTiming timing;
    const auto clicks = simulate_clicks(timing, flat_rate(2e6, 500), 10000, 99);
    std::vector<double> per_pulse(10000, 0.0);
    for (const auto& c : clicks) per_pulse[static_cast<std::size_t>(c.pulse_index)] += 1.0;
    const double mu = testutil::mean_of(per_pulse);
    const double var = testutil::variance_of(per_pulse);
    CHECK(var / mu > 0.9);
    CHECK(var / mu < 1.1);
}

TEST_CASE("simulate_clicks: deterministic in the seed") {
    const ExperimentTiming timing;
    const auto a = simulate_clicks(timing, flat_rate(1e5, 500), 2000, 31415);
    const auto b = simulate_clicks(timing, flat_rate(1e5, 500), 2000, 31415);
    const auto c = simulate_clicks(timing, flat_rate(1e5, 500), 2000, 27182);
    REQUIRE(a.size() == b.size());
    bool identical = true;
    for (std::size_t i = 0; i < a.size(); ++i)
        identical = identical && a[i].pulse_index == b[i].pulse_index &&
                    a[i].delay_ns == b[i].delay_ns;
    CHECK(identical);
    CHECK(a.size() != c.size());  // overwhelmingly likely with ~10^5 draws
}

TEST_CASE("histogram_clicks: bin placement, conservation, errors") {
    std::vector<ClickRecord> clicks = {{0, 10.0}, {0, 11.0}, {1, 490.0}};
    const auto hist = histogram_clicks(clicks, 5.0, 500.0);
    CHECK(hist.counts[2] == 2);   // [10, 15)
    CHECK(hist.counts[98] == 1);  // [490, 495)
    std::uint64_t total = 0;
    for (const auto c : hist.counts) total += c;
    CHECK(total == clicks.size());

    CHECK_THROWS_AS(histogram_clicks({}, 5.0, 500.0), EmptyInput);
    CHECK_THROWS_AS(histogram_clicks(clicks, 3.0, 500.0), InvalidArgument);
    CHECK_THROWS_AS(histogram_clicks({{0, 600.0}}, 5.0, 500.0, 0.0, false), InvalidArgument);
}

TEST_CASE("histogram_clicks: flat background normalizes to one") {
    const ExperimentTiming timing;
    const auto clicks = simulate_clicks(timing, flat_rate(2e6, 500), 2000, 5);
    const auto hist = histogram_clicks(clicks, 10.0, 500.0);
    REQUIRE(hist.normalized.has_value());
    // every bin within 5 sigma of 1 (Poisson, ~4000 counts per bin)
    const double expected_per_bin = 2e6 * 10e-9 * 2000;
    const double sigma = std::sqrt(expected_per_bin) / expected_per_bin;
    for (const double v : *hist.normalized) CHECK(std::abs(v - 1.0) < 5.0 * sigma);
}

TEST_CASE("histogram peak tracks the model peak") {
    // boosted rates keep the Monte Carlo cheap
    const ApdModel apd{4e4, 2.75e7};
    const PulseProfile pulse(49.0, 5.0, 0.015);
    const auto rate = click_rate_profile(pulse, paper_chain(), apd, 500, 1.0);
    const ExperimentTiming timing;
    const auto clicks = simulate_clicks(timing, rate, 30000, 404);
    const auto hist = histogram_clicks(clicks, 2.0, 500.0);

    std::size_t peak_bin = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        if (hist.counts[i] > hist.counts[peak_bin]) peak_bin = i;
    std::size_t model_peak = 0;
    for (std::size_t i = 0; i < rate.size(); ++i)
        if (rate.samples[i] > rate.samples[model_peak]) model_peak = i;
    const double peak_delay = hist.bin_edges_ns[peak_bin] + 1.0;
    CHECK(std::abs(peak_delay - rate.time_at(model_peak)) <= 4.0);
    // delayed relative to the pulse front
    CHECK(peak_delay > 20.0);
}

TEST_CASE("fit_scale_to_model: recovers a known scale") {
    const ApdModel apd{4e4, 2.75e7};
    const PulseProfile pulse(49.0, 5.0, 0.015);
    const auto rate = click_rate_profile(pulse, paper_chain(), apd, 500, 1.0);
    const ExperimentTiming timing;

    SUBCASE("noiseless: histogram equal to the model, zero background") {
        // integer-valued triangular model with no background
        std::vector<double> tri(500, 0.0);
        for (std::size_t i = 100; i < 140; ++i)
            tri[i] = static_cast<double>(i < 120 ? i - 99 : 140 - i);
        const SampledSignal model(0.0, 1.0, tri);
        DelayHistogram hist;
        hist.bin_edges_ns.resize(501);
        for (std::size_t i = 0; i <= 500; ++i) hist.bin_edges_ns[i] = static_cast<double>(i);
        hist.counts.assign(500, 0);
        for (std::size_t i = 0; i < 500; ++i)
            hist.counts[i] = static_cast<std::uint64_t>(tri[i]);
        const auto fit = fit_scale_to_model(hist, model);
        CHECK(fit.scale == doctest::Approx(1.0).epsilon(1e-12));
        for (const double r : fit.residuals) CHECK(std::abs(r) < 1e-9);
    }

    SUBCASE("Monte Carlo at a known boost") {
        // clicks generated from the model itself; the scale estimate carries
        // a Poisson 1-sigma returned by the fit
        const auto clicks = simulate_clicks(timing, rate, 50000, 777);
        const auto hist = histogram_clicks(clicks, 2.0, 500.0);
        const auto fit = fit_scale_to_model(hist, rate);
        // per-bin expectation: rate * dt * 1e-9 * n_pulses, two 1 ns samples per bin
        const double expected_scale = 2.0 * 1e-9 * 50000;
        CHECK(std::abs(fit.scale - expected_scale) < 3.0 * fit.scale_sigma);
        CHECK(fit.chi2_per_bin > 0.5);
        CHECK(fit.chi2_per_bin < 2.0);
    }

    SUBCASE("degenerate model throws") {
        DelayHistogram hist;
        hist.bin_edges_ns = {0.0, 1.0, 2.0};
        hist.counts = {1, 2};
        const SampledSignal zero(0.0, 1.0, std::vector<double>(2, 0.0));
        CHECK_THROWS_AS(fit_scale_to_model(hist, zero), DegenerateModel);
    }
}

TEST_CASE("three pulse lengths share one model family") {
    // chi2/bin of order 1 for each pulse length when fit against its own model
    const ApdModel apd{4e4, 2.75e7};
    const ExperimentTiming timing;
    for (const double len : {7.0, 20.0, 49.0}) {
        const PulseProfile pulse(len, 5.0, 0.015);
        const auto rate = click_rate_profile(pulse, paper_chain(), apd, 500, 1.0);
        const auto clicks = simulate_clicks(timing, rate, 40000, 9000 + (int)len);
        const auto hist = histogram_clicks(clicks, 2.0, 500.0);
        const auto fit = fit_scale_to_model(hist, rate);
        CHECK(fit.chi2_per_bin < 2.0);
    }
}

TEST_CASE("expected click rate never decreases with pulse length") {
    const ApdModel apd;
    std::vector<double> totals;
    for (const double len : {7.0, 20.0, 49.0, 100.0, 200.0}) {
        const PulseProfile pulse(len, 5.0, 0.015);
        const auto rate = click_rate_profile(pulse, paper_chain(), apd, 1000, 1.0);
        totals.push_back(pairwise_sum(rate.samples));
    }
    CHECK(std::is_sorted(totals.begin(), totals.end()));
}

TEST_CASE("gate_clicks: window membership and uniform thinning") {
    std::vector<ClickRecord> clicks = {{0, 55.0}, {0, 85.0}, {1, 40.0}, {1, 80.0}};
    const auto kept = gate_clicks(clicks, 60.0, 40.0);
    REQUIRE(kept.size() == 3);  // closed window: 40 and 80 sit on the edges
    CHECK(kept[0].delay_ns == 55.0);
    CHECK(kept[1].delay_ns == 40.0);
    CHECK(kept[2].delay_ns == 80.0);

    // flat background: kept fraction ~ gate length / window
    const ExperimentTiming timing;
    const auto flat = simulate_clicks(timing, flat_rate(2e6, 500), 5000, 66);
    const auto gated = gate_clicks(flat, 100.0, 40.0);
    const double p = (40.0 + 1e-12) / 500.0;  // closed gate interval
    const double expected = p * static_cast<double>(flat.size());
    const double sigma = std::sqrt(expected * (1.0 - p));
    CHECK(std::abs(static_cast<double>(gated.size()) - expected) < 5.0 * sigma);
}

TEST_CASE("background floor: extinction-only pumping is time independent") {
    const ApdModel apd{0.0, 2.75e7};
    const PulseProfile leak_only(5.0, 0.0, 0.25);
    // evaluate after the start-up transient by using a long grid and keeping
    // the second half
    auto rate = click_rate_profile(leak_only, paper_chain(), apd, 4000, 1.0);
    std::vector<double> settled(rate.samples.begin() + 2000, rate.samples.end());
    const SampledSignal flat(0.0, 1.0, settled);
    const ExperimentTiming timing{50e3, 2000.0, 0.2, 0.8};
    const auto clicks = simulate_clicks(timing, flat, 10000, 11);
    const auto hist = histogram_clicks(clicks, 100.0, 2000.0);
    double lo = 1e300, hi = 0.0;
    for (const auto c : hist.counts) {
        lo = std::min(lo, static_cast<double>(c));
        hi = std::max(hi, static_cast<double>(c));
    }
    // max/min ratio approaches 1 for growing counts; ~34k per bin here
    CHECK(hi / lo < 1.1);
}

TEST_SUITE_END();
