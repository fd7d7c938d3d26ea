// Python bindings for the main operations: pulse/filter signal model, click
// simulation, homodyne window synthesis, and the tomography chain.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <span>

#include "timegate/config.hpp"
#include "timegate/pipeline.hpp"
#include "timegate/rng.hpp"
#include "timegate/tomography.hpp"
#include "timegate/trace_io.hpp"

namespace py = pybind11;
using namespace timegate;

namespace {

std::vector<double> rho_to_vector(const std::array<double, fock_cutoff + 1>& rho) {
    return {rho.begin(), rho.end()};
}

}  // namespace

PYBIND11_MODULE(_timegate, m) {
    m.doc() = "Pulsed-OPO heralded single photon simulator and tomography toolkit";

    py::register_exception<Error>(m, "TimegateError");

    // --- signal ---------------------------------------------------------
    py::class_<PulseProfile>(m, "PulseProfile")
        .def(py::init<double, double, double>(), py::arg("duration_ns"), py::arg("rise_ns"),
             py::arg("extinction") = 0.0)
        .def_readonly("duration_ns", &PulseProfile::duration_ns)
        .def_readonly("rise_ns", &PulseProfile::rise_ns)
        .def_readonly("extinction", &PulseProfile::extinction)
        .def("value", &PulseProfile::value, py::arg("t_ns"));

    py::class_<CavityFilter>(m, "CavityFilter")
        .def(py::init<double>(), py::arg("kappa_rad_per_ns"))
        .def_static("from_half_width_mhz", &CavityFilter::from_half_width_mhz, py::arg("mhz"))
        .def_static("from_full_width_mhz", &CavityFilter::from_full_width_mhz, py::arg("mhz"))
        .def_readonly("kappa_rad_per_ns", &CavityFilter::kappa_rad_per_ns);

    py::class_<FilterChain>(m, "FilterChain")
        .def(py::init<std::vector<CavityFilter>>(), py::arg("filters"))
        .def_readonly("filters", &FilterChain::filters);

    py::class_<SampledSignal>(m, "SampledSignal")
        .def(py::init<double, double, std::vector<double>>(), py::arg("start_time_ns"),
             py::arg("dt_ns"), py::arg("samples"))
        .def_readonly("start_time_ns", &SampledSignal::start_time_ns)
        .def_readonly("dt_ns", &SampledSignal::dt_ns)
        .def_readonly("samples", &SampledSignal::samples)
        .def("__len__", &SampledSignal::size);

    m.def("evaluate_pulse", &evaluate_pulse, py::arg("pulse"), py::arg("t_ns"));
    m.def("impulse_response", &impulse_response, py::arg("filter"), py::arg("t_ns"));
    m.def("sample_pulse", &sample_pulse, py::arg("pulse"), py::arg("n_samples"), py::arg("dt_ns"),
          py::arg("offset_ns") = 0.0, py::arg("start_time_ns") = 0.0);
    m.def("filter_signal", &filter_signal, py::arg("signal"), py::arg("chain"));
    m.def("intensity", &intensity, py::arg("signal"));

    // --- clicks ---------------------------------------------------------
    py::class_<ExperimentTiming>(m, "ExperimentTiming")
        .def(py::init<>())
        .def_readwrite("rep_rate_hz", &ExperimentTiming::rep_rate_hz)
        .def_readwrite("measure_window_ns", &ExperimentTiming::measure_window_ns)
        .def_readwrite("duty_measure_s", &ExperimentTiming::duty_measure_s)
        .def_readwrite("duty_lock_s", &ExperimentTiming::duty_lock_s);

    py::class_<ApdModel>(m, "ApdModel")
        .def(py::init<>())
        .def_readwrite("dark_rate_per_s", &ApdModel::dark_rate_per_s)
        .def_readwrite("cw_reference_rate_per_s", &ApdModel::cw_reference_rate_per_s);

    py::enum_<LeakageMode>(m, "LeakageMode")
        .value("intensity_ratio", LeakageMode::intensity_ratio)
        .value("field_squared", LeakageMode::field_squared);

    py::class_<ClickRecord>(m, "ClickRecord")
        .def_readonly("pulse_index", &ClickRecord::pulse_index)
        .def_readonly("delay_ns", &ClickRecord::delay_ns);

    py::class_<DelayHistogram>(m, "DelayHistogram")
        .def_readonly("bin_edges_ns", &DelayHistogram::bin_edges_ns)
        .def_readonly("counts", &DelayHistogram::counts)
        .def_readonly("normalized", &DelayHistogram::normalized)
        .def_readonly("background_level", &DelayHistogram::background_level);

    m.def("click_rate_profile", &click_rate_profile, py::arg("pulse"), py::arg("chain"),
          py::arg("apd"), py::arg("n_samples") = 500, py::arg("dt_ns") = 1.0,
          py::arg("leakage") = LeakageMode::intensity_ratio);
    m.def("simulate_clicks", &simulate_clicks, py::arg("timing"), py::arg("rate_profile"),
          py::arg("n_pulses"), py::arg("seed"));
    m.def("histogram_clicks", &histogram_clicks, py::arg("clicks"), py::arg("bin_width_ns"),
          py::arg("window_ns"), py::arg("total_live_time_s") = 0.0, py::arg("normalize") = true,
          py::arg("background_start_ns") = std::nullopt);
    m.def("gate_clicks", &gate_clicks, py::arg("clicks"), py::arg("center_ns"),
          py::arg("length_ns"));

    // --- homodyne ---------------------------------------------------------
    py::class_<TargetState>(m, "TargetState")
        .def(py::init([](const std::vector<double>& rho) {
                 return TargetState(std::span<const double>(rho.data(), rho.size()));
             }),
             py::arg("populations"))
        .def_static(
            "normalized",
            [](const std::vector<double>& rho) {
                return TargetState::normalized(std::span<const double>(rho.data(), rho.size()));
            },
            py::arg("populations"))
        .def_property_readonly("populations",
                               [](const TargetState& s) { return rho_to_vector(s.populations); })
        .def("mean_photon_number", &TargetState::mean_photon_number)
        .def("quadrature_variance", &TargetState::quadrature_variance);

    py::class_<ModeFunction>(m, "ModeFunction")
        .def_static("normalized", &ModeFunction::normalized, py::arg("values"))
        .def_readonly("values", &ModeFunction::values)
        .def_static("fidelity", &ModeFunction::fidelity, py::arg("a"), py::arg("b"));

    py::class_<TraceWindow>(m, "TraceWindow")
        .def_readonly("samples", &TraceWindow::samples)
        .def_readonly("qualifier_delay_ns", &TraceWindow::qualifier_delay_ns);

    py::class_<TraceSet>(m, "TraceSet")
        .def_readonly("windows", &TraceSet::windows)
        .def_readonly("vacuum", &TraceSet::vacuum)
        .def_readonly("dt_ns", &TraceSet::dt_ns)
        .def("n_windows", &TraceSet::n_windows)
        .def("window_length", &TraceSet::window_length);

    py::class_<Rng>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def_static("stream", &Rng::stream, py::arg("master_seed"), py::arg("index"))
        .def("uniform", &Rng::uniform)
        .def("normal", py::overload_cast<>(&Rng::normal))
        .def("poisson", &Rng::poisson, py::arg("mean"));

    py::class_<ElectronicNoise>(m, "ElectronicNoise")
        .def(py::init<>())
        .def_readwrite("rms", &ElectronicNoise::rms)
        .def_readwrite("corner_mhz", &ElectronicNoise::corner_mhz);

    m.def("optimal_mode", &optimal_mode, py::arg("pulse"), py::arg("opo"), py::arg("delay_ns"),
          py::arg("n_samples") = 500, py::arg("dt_ns") = 1.0);
    m.def("sample_mode_quadrature", &sample_mode_quadrature, py::arg("state"), py::arg("rng"));
    m.def("synthesize_window", &synthesize_window, py::arg("x"), py::arg("mode"), py::arg("rng"));
    m.def("generate_trace_set", &generate_trace_set, py::arg("state"), py::arg("true_mode"),
          py::arg("n_windows"), py::arg("vacuum"), py::arg("seed"),
          py::arg("gate_center_ns") = 0.0, py::arg("gate_length_ns") = 40.0,
          py::arg("background_fraction") = 0.0, py::arg("noise") = ElectronicNoise{},
          py::arg("dt_ns") = 1.0);

    // --- tomography ---------------------------------------------------------
    py::class_<VarianceTrace>(m, "VarianceTrace")
        .def_readonly("values", &VarianceTrace::values)
        .def_readonly("n_windows", &VarianceTrace::n_windows)
        .def_readonly("dt_ns", &VarianceTrace::dt_ns);

    py::class_<QuadratureSet>(m, "QuadratureSet")
        .def(py::init([](const std::vector<double>& points) {
                 QuadratureSet q;
                 q.points = points;
                 return q;
             }),
             py::arg("points"))
        .def_readonly("points", &QuadratureSet::points)
        .def_readonly("vacuum_scale", &QuadratureSet::vacuum_scale)
        .def("variance", &QuadratureSet::variance);

    py::class_<DiagonalDensityMatrix>(m, "DiagonalDensityMatrix")
        .def(py::init([](const std::vector<double>& rho) {
                 return DiagonalDensityMatrix(std::span<const double>(rho.data(), rho.size()));
             }),
             py::arg("rho"))
        .def_property_readonly("rho",
                               [](const DiagonalDensityMatrix& d) { return rho_to_vector(d.rho); });

    py::class_<EmDiagnostics>(m, "EmDiagnostics")
        .def_readonly("iterations", &EmDiagnostics::iterations)
        .def_readonly("converged", &EmDiagnostics::converged)
        .def_readonly("final_log_likelihood", &EmDiagnostics::final_log_likelihood)
        .def_readonly("log_likelihood_history", &EmDiagnostics::log_likelihood_history);

    py::class_<FockFitResult>(m, "FockFitResult")
        .def_readonly("rho", &FockFitResult::rho)
        .def_readonly("diagnostics", &FockFitResult::diagnostics);

    m.def("variance_trace", &variance_trace, py::arg("signal_set"), py::arg("vacuum_set"));
    m.def("lowpass", &lowpass, py::arg("trace"), py::arg("cutoff_mhz"));
    m.def("estimate_mode_from_variance", &estimate_mode_from_variance, py::arg("trace"));
    m.def("project", &project, py::arg("set"), py::arg("mode"), py::arg("vacuum_set"));
    m.def("fock_marginal", &fock_marginal, py::arg("n"), py::arg("x"));
    m.def(
        "fit_fock_mixture",
        [](const QuadratureSet& q, double tol, std::size_t max_iter, std::size_t min_points) {
            EmOptions options;
            options.tol = tol;
            options.max_iter = max_iter;
            options.min_points = min_points;
            return fit_fock_mixture(q, options);
        },
        py::arg("q"), py::arg("tol") = 1e-9, py::arg("max_iter") = 100000,
        py::arg("min_points") = 1000);
    m.def("wigner_center", [](const std::vector<double>& rho) {
        return wigner_center(std::span<const double>(rho.data(), rho.size()));
    });

    // --- config / io / pipeline ---------------------------------------------
    m.def("write_trace_set", &write_trace_set, py::arg("path"), py::arg("set"));
    m.def("read_trace_set", &read_trace_set, py::arg("path"));

    m.def(
        "run_pipeline",
        [](const std::string& config_json, const std::string& out_dir) {
            const RunConfig config = parse_config(config_json);
            const PipelineResult result =
                out_dir.empty() ? run_pipeline(config) : run_pipeline(config, out_dir);
            py::dict report;
            for (const auto& [key, value] : result.report.entries)
                report[py::str(key)] = py::str(value);
            return report;
        },
        py::arg("config_json") = "{}", py::arg("out_dir") = "",
        "Run the full chain from a JSON config string; returns the report as a dict");
}
