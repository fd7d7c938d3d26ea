#include "timegate/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "timegate/numerics.hpp"

namespace timegate {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::string& section,
                         std::initializer_list<const char*> known) {
    for (const auto& [key, value] : object.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ParseError("config: unknown key '" + (section.empty() ? key : section + "." + key) +
                             "'");
    }
}

double get_number(const json& object, const char* key, double fallback) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_number()) throw ParseError(std::string("config: field '") + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t get_uint(const json& object, const char* key, std::uint64_t fallback) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_number_unsigned())
        throw ParseError(std::string("config: field '") + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json& object, const char* key, const std::string& fallback) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_string()) throw ParseError(std::string("config: field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

void RunConfig::validate() const {
    if (!(pulse.duration_ns > 0.0)) throw ValidationError("pulse.duration_ns must be > 0");
    if (!(pulse.rise_ns >= 0.0)) throw ValidationError("pulse.rise_ns must be >= 0");
    if (!(pulse.extinction >= 0.0 && pulse.extinction < 1.0))
        throw ValidationError("pulse.extinction must be in [0, 1)");
    if (filters_half_width_mhz.empty()) throw ValidationError("filters must not be empty");
    for (const double f : filters_half_width_mhz)
        if (!(f > 0.0)) throw ValidationError("filters.kappa_over_2pi_MHz must be > 0");
    timing.validate();
    apd.validate();
    if (gate.center_ns && !(*gate.center_ns >= 0.0))
        throw ValidationError("gate.center_ns must be >= 0");
    if (!(gate.length_ns > 0.0)) throw ValidationError("gate.length_ns must be > 0");
    if (!(analysis.lowpass_mhz > 0.0)) throw ValidationError("analysis.lowpass_MHz must be > 0");
    if (analysis.fock_cutoff < 1 || analysis.fock_cutoff > 6)
        throw ValidationError("analysis.fock_cutoff must be in 1..6");
    if (!(analysis.em_tol > 0.0)) throw ValidationError("analysis.em_tol must be > 0");
    if (analysis.em_max_iter == 0) throw ValidationError("analysis.em_max_iter must be > 0");
    if (analysis.mode_source != "optimal" && analysis.mode_source != "estimated")
        throw ValidationError("analysis.mode_source must be 'optimal' or 'estimated'");
    if (clicks.n_pulses <= 0) throw ValidationError("clicks.n_pulses must be > 0");
    if (!(clicks.bin_ns > 0.0)) throw ValidationError("clicks.bin_ns must be > 0");
    if (clicks.leakage != "intensity" && clicks.leakage != "field")
        throw ValidationError("clicks.leakage must be 'intensity' or 'field'");
    if (truth.populations.empty() || truth.populations.size() > 7)
        throw ValidationError("truth.populations must have 1..7 entries");
    double pop_sum = 0.0;
    for (const double p : truth.populations) {
        if (!(p >= 0.0)) throw ValidationError("truth.populations must be >= 0");
        pop_sum += p;
    }
    if (!(pop_sum > 0.0)) throw ValidationError("truth.populations must not all be zero");
    if (truth.n_windows < 2) throw ValidationError("truth.n_windows must be >= 2");
    if (truth.n_vacuum < 2) throw ValidationError("truth.n_vacuum must be >= 2");
    if (truth.background_fraction != -1.0 &&
        !(truth.background_fraction >= 0.0 && truth.background_fraction <= 1.0))
        throw ValidationError("truth.background_fraction must be in [0, 1] or -1 (auto)");
    if (!(truth.mode_delay_ns >= 0.0)) throw ValidationError("truth.mode_delay_ns must be >= 0");
    if (!(truth.noise_rms >= 0.0)) throw ValidationError("truth.noise_rms must be >= 0");
    if (!(truth.noise_corner_mhz > 0.0)) throw ValidationError("truth.noise_corner_mhz must be > 0");
    if (!(dt_ns > 0.0)) throw ValidationError("dt_ns must be > 0");
    const double n = timing.measure_window_ns / dt_ns;
    if (std::abs(n - std::round(n)) > 1e-9)
        throw ValidationError("dt_ns must divide timing.window_ns");
}

PulseProfile RunConfig::pulse_profile() const {
    return PulseProfile(pulse.duration_ns, pulse.rise_ns, pulse.extinction);
}

FilterChain RunConfig::filter_chain() const {
    std::vector<CavityFilter> filters;
    filters.reserve(filters_half_width_mhz.size());
    for (const double mhz : filters_half_width_mhz)
        filters.push_back(CavityFilter::from_half_width_mhz(mhz));
    return FilterChain(std::move(filters));
}

CavityFilter RunConfig::opo_filter() const {
    return CavityFilter::from_half_width_mhz(filters_half_width_mhz.front());
}

LeakageMode RunConfig::leakage_mode() const {
    return clicks.leakage == "field" ? LeakageMode::field_squared : LeakageMode::intensity_ratio;
}

std::size_t RunConfig::n_grid_samples() const {
    return static_cast<std::size_t>(std::llround(timing.measure_window_ns / dt_ns));
}

std::string RunConfig::canonical_json() const {
    json j;
    j["pulse"] = {{"duration_ns", pulse.duration_ns},
                  {"rise_ns", pulse.rise_ns},
                  {"extinction", pulse.extinction}};
    json filters = json::array();
    for (const double f : filters_half_width_mhz) filters.push_back({{"kappa_over_2pi_MHz", f}});
    j["filters"] = filters;
    j["timing"] = {{"rep_rate_Hz", timing.rep_rate_hz},
                   {"window_ns", timing.measure_window_ns},
                   {"duty_measure_s", timing.duty_measure_s},
                   {"duty_lock_s", timing.duty_lock_s}};
    j["apd"] = {{"dark_rate_per_s", apd.dark_rate_per_s},
                {"cw_rate_per_s", apd.cw_reference_rate_per_s}};
    j["gate"] = {{"length_ns", gate.length_ns}};
    if (gate.center_ns) j["gate"]["center_ns"] = *gate.center_ns;
    j["analysis"] = {{"lowpass_MHz", analysis.lowpass_mhz},
                     {"fock_cutoff", analysis.fock_cutoff},
                     {"em_tol", analysis.em_tol},
                     {"em_max_iter", analysis.em_max_iter},
                     {"em_min_points", analysis.em_min_points},
                     {"mode_source", analysis.mode_source}};
    j["clicks"] = {{"n_pulses", clicks.n_pulses},
                   {"bin_ns", clicks.bin_ns},
                   {"leakage", clicks.leakage}};
    j["truth"] = {{"populations", truth.populations},
                  {"n_windows", truth.n_windows},
                  {"n_vacuum", truth.n_vacuum},
                  {"background_fraction", truth.background_fraction},
                  {"mode_delay_ns", truth.mode_delay_ns},
                  {"noise_rms", truth.noise_rms},
                  {"noise_corner_MHz", truth.noise_corner_mhz}};
    j["dt_ns"] = dt_ns;
    j["seed"] = seed;
    return j.dump(2);  // nlohmann objects iterate in sorted key order
}

std::uint64_t RunConfig::hash() const { return fnv1a64(canonical_json()); }

RunConfig parse_config(const std::string& text) {
    RunConfig config;

    bool blank = true;
    for (const char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) {
            blank = false;
            break;
        }
    if (blank) {
        config.validate();
        return config;
    }

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config: top level must be an object");

    reject_unknown_keys(j, "",
                        {"pulse", "filters", "timing", "apd", "gate", "analysis", "clicks",
                         "truth", "dt_ns", "seed"});

    if (j.contains("pulse")) {
        const auto& p = j.at("pulse");
        reject_unknown_keys(p, "pulse", {"duration_ns", "rise_ns", "extinction"});
        config.pulse.duration_ns = get_number(p, "duration_ns", config.pulse.duration_ns);
        config.pulse.rise_ns = get_number(p, "rise_ns", config.pulse.rise_ns);
        config.pulse.extinction = get_number(p, "extinction", config.pulse.extinction);
    }
    if (j.contains("filters")) {
        const auto& f = j.at("filters");
        if (!f.is_array()) throw ParseError("config: filters must be an array");
        config.filters_half_width_mhz.clear();
        for (const auto& entry : f) {
            reject_unknown_keys(entry, "filters[]", {"kappa_over_2pi_MHz"});
            if (!entry.contains("kappa_over_2pi_MHz"))
                throw ParseError("config: filters[] entries need kappa_over_2pi_MHz");
            config.filters_half_width_mhz.push_back(get_number(entry, "kappa_over_2pi_MHz", 0.0));
        }
    }
    if (j.contains("timing")) {
        const auto& t = j.at("timing");
        reject_unknown_keys(t, "timing",
                            {"rep_rate_Hz", "window_ns", "duty_measure_s", "duty_lock_s"});
        config.timing.rep_rate_hz = get_number(t, "rep_rate_Hz", config.timing.rep_rate_hz);
        config.timing.measure_window_ns = get_number(t, "window_ns", config.timing.measure_window_ns);
        config.timing.duty_measure_s = get_number(t, "duty_measure_s", config.timing.duty_measure_s);
        config.timing.duty_lock_s = get_number(t, "duty_lock_s", config.timing.duty_lock_s);
    }
    if (j.contains("apd")) {
        const auto& a = j.at("apd");
        reject_unknown_keys(a, "apd", {"dark_rate_per_s", "cw_rate_per_s"});
        config.apd.dark_rate_per_s = get_number(a, "dark_rate_per_s", config.apd.dark_rate_per_s);
        config.apd.cw_reference_rate_per_s =
            get_number(a, "cw_rate_per_s", config.apd.cw_reference_rate_per_s);
    }
    if (j.contains("gate")) {
        const auto& g = j.at("gate");
        reject_unknown_keys(g, "gate", {"center_ns", "length_ns"});
        if (g.contains("center_ns")) config.gate.center_ns = get_number(g, "center_ns", 0.0);
        config.gate.length_ns = get_number(g, "length_ns", config.gate.length_ns);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        reject_unknown_keys(a, "analysis",
                            {"lowpass_MHz", "fock_cutoff", "em_tol", "em_max_iter",
                             "em_min_points", "mode_source"});
        config.analysis.lowpass_mhz = get_number(a, "lowpass_MHz", config.analysis.lowpass_mhz);
        config.analysis.fock_cutoff =
            static_cast<int>(get_uint(a, "fock_cutoff",
                                      static_cast<std::uint64_t>(config.analysis.fock_cutoff)));
        config.analysis.em_tol = get_number(a, "em_tol", config.analysis.em_tol);
        config.analysis.em_max_iter = get_uint(a, "em_max_iter", config.analysis.em_max_iter);
        config.analysis.em_min_points = get_uint(a, "em_min_points", config.analysis.em_min_points);
        config.analysis.mode_source = get_string(a, "mode_source", config.analysis.mode_source);
    }
    if (j.contains("clicks")) {
        const auto& c = j.at("clicks");
        reject_unknown_keys(c, "clicks", {"n_pulses", "bin_ns", "leakage"});
        config.clicks.n_pulses = static_cast<std::int64_t>(
            get_uint(c, "n_pulses", static_cast<std::uint64_t>(config.clicks.n_pulses)));
        config.clicks.bin_ns = get_number(c, "bin_ns", config.clicks.bin_ns);
        config.clicks.leakage = get_string(c, "leakage", config.clicks.leakage);
    }
    if (j.contains("truth")) {
        const auto& t = j.at("truth");
        reject_unknown_keys(t, "truth",
                            {"populations", "n_windows", "n_vacuum", "background_fraction",
                             "mode_delay_ns", "noise_rms", "noise_corner_MHz"});
        if (t.contains("populations")) {
            const auto& pops = t.at("populations");
            if (!pops.is_array()) throw ParseError("config: truth.populations must be an array");
            config.truth.populations.clear();
            for (const auto& v : pops) {
                if (!v.is_number()) throw ParseError("config: truth.populations must be numbers");
                config.truth.populations.push_back(v.get<double>());
            }
        }
        config.truth.n_windows = get_uint(t, "n_windows", config.truth.n_windows);
        config.truth.n_vacuum = get_uint(t, "n_vacuum", config.truth.n_vacuum);
        config.truth.background_fraction =
            get_number(t, "background_fraction", config.truth.background_fraction);
        config.truth.mode_delay_ns = get_number(t, "mode_delay_ns", config.truth.mode_delay_ns);
        config.truth.noise_rms = get_number(t, "noise_rms", config.truth.noise_rms);
        config.truth.noise_corner_mhz =
            get_number(t, "noise_corner_MHz", config.truth.noise_corner_mhz);
    }
    config.dt_ns = get_number(j, "dt_ns", config.dt_ns);
    config.seed = get_uint(j, "seed", config.seed);

    config.validate();
    return config;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void save_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("config: cannot write '" + path + "'");
    out << config.canonical_json() << "\n";
}

}  // namespace timegate
