#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>

#include "testutil.hpp"
#include "timegate/pipeline.hpp"

using namespace timegate;

namespace {

// Desk-scale config: small click run, enough windows for a stable fit.
const char* small_config = R"({
    "clicks": {"n_pulses": 20000},
    "apd": {"dark_rate_per_s": 40000, "cw_rate_per_s": 27500000},
    "truth": {"populations": [0.392, 0.595, 0.010], "n_windows": 4000, "n_vacuum": 4000},
    "analysis": {"em_min_points": 1000, "em_tol": 1e-8},
    "seed": 5
})";

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("determinism: identical config and seed give byte-identical reports") {
    const RunConfig config = parse_config(small_config);
    const auto a = run_pipeline(config);
    const auto b = run_pipeline(config);
    CHECK(a.report.render() == b.report.render());
    CHECK(!a.report.render().empty());

    RunConfig reseeded = config;
    reseeded.seed = 6;
    const auto c = run_pipeline(reseeded);
    CHECK(a.report.render() != c.report.render());
}

TEST_CASE("vacuum ground truth recovers W(0,0) = 1/pi") {
    RunConfig config = parse_config(R"({
        "clicks": {"n_pulses": 5000},
        "truth": {"populations": [1.0], "n_windows": 6000, "n_vacuum": 6000},
        "seed": 17
    })");
    const auto result = run_pipeline(config);
    const double w00 = std::stod(*result.report.find("fit.w00"));
    CHECK(std::abs(w00 - 1.0 / std::numbers::pi) < 0.01);
    CHECK(result.fit.rho.rho[0] > 0.97);
}

TEST_CASE("background heralds dilute the 20 ns state more than the 49 ns state") {
    auto run_for = [](double pulse_ns, std::uint64_t seed) {
        RunConfig config = parse_config(small_config);
        config.pulse.duration_ns = pulse_ns;
        config.truth.background_fraction = -1.0;  // derive from the click model
        config.seed = seed;
        // undo the rate boost for the background-share computation: the
        // boost cancels in the in-gate ratio, so keep it for speed
        return run_pipeline(config);
    };
    const auto short_run = run_for(20.0, 21);
    const auto long_run = run_for(49.0, 22);
    const double bg_short = std::stod(*short_run.report.find("gate.model_background_fraction"));
    const double bg_long = std::stod(*long_run.report.find("gate.model_background_fraction"));
    CHECK(bg_short > bg_long);
    CHECK(short_run.fit.rho.rho[0] > long_run.fit.rho.rho[0]);
    // the heralded state stays a vacuum/one-photon mixture
    CHECK(short_run.fit.rho.rho[1] < long_run.fit.rho.rho[1]);
}

TEST_CASE("pipeline fit lands near the ground truth on the known mode") {
    const RunConfig config = parse_config(small_config);
    const auto result = run_pipeline(config);
    const double rho11_truth = 0.595 / 0.997;
    CHECK(std::abs(result.fit.rho.rho[1] - rho11_truth) < 0.05);
    const double w00 = std::stod(*result.report.find("fit.w00"));
    CHECK(std::abs(w00 - (-0.061)) < 0.04);
    // binned least squares agrees with EM
    const double w00_binned = std::stod(*result.report.find("fit.w00_binned"));
    CHECK(std::abs(w00 - w00_binned) < 0.03);
}

TEST_CASE("grid errors carry the stage name") {
    RunConfig config = parse_config(small_config);
    config.dt_ns = 10.0;  // kappa*dt = 0.75 for the 12 MHz cavity
    try {
        run_pipeline(config);
        FAIL("expected GridTooCoarse");
    } catch (const GridTooCoarse& e) {
        CHECK(std::string(e.what()).find("filter_signal") != std::string::npos);
    }
}

TEST_CASE("report: render/parse round trip and summary") {
    const RunConfig config = parse_config(small_config);
    const auto result = run_pipeline(config);
    const std::string text = result.report.render();
    const Report parsed = Report::parse(text);
    CHECK(parsed.entries == result.report.entries);
    CHECK(text.find("# Summary") != std::string::npos);
    CHECK(Report::summary_from_entries(parsed.entries) ==
          Report::summary_from_entries(result.report.entries));
}

TEST_SUITE_END();
