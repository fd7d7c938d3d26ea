#pragma once

#include <string>
#include <utility>
#include <vector>

#include "timegate/config.hpp"
#include "timegate/tomography.hpp"

namespace timegate {

// Machine-readable key/value report plus a rendered human summary.
struct Report {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    const std::string* find(const std::string& key) const;

    // "key = value" lines followed by a commented summary block.
    std::string render() const;
    static std::string summary_from_entries(
        const std::vector<std::pair<std::string, std::string>>& entries);
    static Report parse(const std::string& text);
};

struct PipelineResult {
    Report report;
    SampledSignal rate_profile;
    DelayHistogram histogram;
    VarianceTrace variance_raw;
    VarianceTrace variance_lowpassed;
    ModeFunction mode_optimal;
    ModeFunction mode_used;
    bool mode_estimated_available = false;
    ModeFunction mode_estimated;  // valid when mode_estimated_available
    QuadratureSet quadratures;
    MarginalHistogram marginal;
    FockFitResult fit;
    DiagonalDensityMatrix fit_binned;
};

// Full chain: click model -> Monte Carlo clicks -> gate -> synthetic
// homodyne windows -> variance/mode -> projection -> Fock fit -> Wigner
// center value. Deterministic for a given config (seeded throughout).
PipelineResult run_pipeline(const RunConfig& config);

// Run and write report.txt plus the CSV artifacts into out_dir.
PipelineResult run_pipeline(const RunConfig& config, const std::string& out_dir);

}  // namespace timegate
