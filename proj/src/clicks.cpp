#include "timegate/clicks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "timegate/numerics.hpp"
#include "timegate/rng.hpp"

namespace timegate {

namespace {

constexpr double ns_per_s = 1e9;

// Index of the first bin belonging to the background region.
std::size_t background_first_bin(std::size_t n_bins, double bin_width_ns, double window_ns,
                                 std::optional<double> background_start_ns) {
    const double start = background_start_ns.value_or(0.75 * window_ns);
    if (!(start >= 0.0 && start < window_ns))
        throw InvalidArgument("background region must start inside the window");
    auto first = static_cast<std::size_t>(std::ceil(start / bin_width_ns - 1e-9));
    return std::min(first, n_bins - 1);
}

}  // namespace

void ExperimentTiming::validate() const {
    if (!(rep_rate_hz > 0.0)) throw ValidationError("timing: rep_rate must be > 0");
    if (!(measure_window_ns > 0.0)) throw ValidationError("timing: measure window must be > 0");
    if (!(duty_measure_s >= 0.0) || !(duty_lock_s >= 0.0))
        throw ValidationError("timing: duty fields must be >= 0");
}

double ExperimentTiming::duty_fraction() const {
    const double total = duty_measure_s + duty_lock_s;
    return total > 0.0 ? duty_measure_s / total : 1.0;
}

void ApdModel::validate() const {
    if (!(dark_rate_per_s >= 0.0)) throw ValidationError("apd: dark rate must be >= 0");
    if (!(cw_reference_rate_per_s > 0.0)) throw ValidationError("apd: cw rate must be > 0");
}

SampledSignal click_rate_profile(const PulseProfile& pulse, const FilterChain& chain,
                                 const ApdModel& apd, std::size_t n_samples, double dt_ns,
                                 LeakageMode leakage) {
    apd.validate();
    // The cw leak pumps down-conversion continuously; spontaneous emission
    // from the leak and from the pulse add at the intensity level. The
    // leaked intensity fraction is ext (power extinction) or ext^2 when the
    // extinction number is read as a field floor.
    const double leak = leakage == LeakageMode::intensity_ratio
                            ? pulse.extinction
                            : pulse.extinction * pulse.extinction;
    const PulseProfile bare(pulse.duration_ns, pulse.rise_ns, 0.0);
    const SampledSignal envelope = sample_pulse(bare, n_samples, dt_ns);
    const SampledSignal filtered = filter_signal(envelope, chain);
    SampledSignal rate = intensity(filtered);

    // cw anchor: a constant envelope of 1 must give the cw reference rate.
    const double c = std::max(apd.cw_reference_rate_per_s - apd.dark_rate_per_s, 0.0);
    for (double& r : rate.samples)
        r = c * (leak + (1.0 - leak) * r) + apd.dark_rate_per_s;
    return rate;
}

std::vector<ClickRecord> simulate_clicks(const ExperimentTiming& timing,
                                         const SampledSignal& rate_profile,
                                         std::int64_t n_pulses, std::uint64_t seed) {
    timing.validate();
    if (n_pulses <= 0) throw InvalidArgument("simulate_clicks: n_pulses must be > 0");

    const double dt = rate_profile.dt_ns;
    const double window = timing.measure_window_ns;
    const auto n_bins = static_cast<std::size_t>(
        std::min<double>(std::floor(window / dt + 1e-9), static_cast<double>(rate_profile.size())));

    std::vector<double> bin_mean(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i)
        bin_mean[i] = std::max(rate_profile.samples[i], 0.0) * dt / ns_per_s;

    std::vector<ClickRecord> clicks;
    for (std::int64_t p = 0; p < n_pulses; ++p) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(p));
        for (std::size_t i = 0; i < n_bins; ++i) {
            const std::uint64_t k = rng.poisson(bin_mean[i]);
            for (std::uint64_t j = 0; j < k; ++j) {
                const double delay =
                    rate_profile.start_time_ns + (static_cast<double>(i) + rng.uniform()) * dt;
                clicks.push_back({p, delay});
            }
        }
    }
    return clicks;
}

DelayHistogram histogram_clicks(const std::vector<ClickRecord>& clicks, double bin_width_ns,
                                double window_ns, double total_live_time_s, bool normalize,
                                std::optional<double> background_start_ns) {
    if (!(bin_width_ns > 0.0) || !(window_ns > 0.0))
        throw InvalidArgument("histogram_clicks: bin width and window must be > 0");
    const double ratio = window_ns / bin_width_ns;
    const auto n_bins = static_cast<std::size_t>(std::llround(ratio));
    if (n_bins == 0 || std::abs(ratio - static_cast<double>(n_bins)) > 1e-9)
        throw InvalidArgument("histogram_clicks: bin width must divide the window");

    DelayHistogram hist;
    hist.total_live_time_s = total_live_time_s;
    hist.bin_edges_ns.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i)
        hist.bin_edges_ns[i] = bin_width_ns * static_cast<double>(i);
    hist.counts.assign(n_bins, 0);

    for (const auto& click : clicks) {
        if (!(click.delay_ns >= 0.0 && click.delay_ns < window_ns))
            throw InvalidArgument("histogram_clicks: click delay outside [0, window)");
        auto bin = static_cast<std::size_t>(click.delay_ns / bin_width_ns);
        if (bin >= n_bins) bin = n_bins - 1;
        ++hist.counts[bin];
    }

    if (normalize) {
        if (clicks.empty())
            throw EmptyInput("histogram_clicks: normalization requested with no clicks");
        const std::size_t first =
            background_first_bin(n_bins, bin_width_ns, window_ns, background_start_ns);
        std::vector<double> bg;
        for (std::size_t i = first; i < n_bins; ++i)
            bg.push_back(static_cast<double>(hist.counts[i]));
        const double level = mean(bg);
        if (!(level > 0.0))
            throw EmptyInput("histogram_clicks: background region contains no counts");
        hist.background_level = level;
        std::vector<double> norm(n_bins);
        for (std::size_t i = 0; i < n_bins; ++i)
            norm[i] = static_cast<double>(hist.counts[i]) / level;
        hist.normalized = std::move(norm);
    }
    return hist;
}

ScaleFitResult fit_scale_to_model(const DelayHistogram& hist, const SampledSignal& model,
                                  std::optional<double> background_start_ns) {
    const std::size_t n_bins = hist.n_bins();
    if (n_bins == 0) throw EmptyInput("fit_scale_to_model: empty histogram");
    double model_max = 0.0;
    for (const double m : model.samples) model_max = std::max(model_max, std::abs(m));
    if (model_max == 0.0) throw DegenerateModel("fit_scale_to_model: model identically zero");

    const double bin_width = hist.bin_width_ns();
    const double window = hist.bin_edges_ns.back();

    // Model value per histogram bin: mean of the model samples in the bin.
    std::vector<double> model_bins(n_bins, 0.0);
    std::vector<std::size_t> counts_per_bin(n_bins, 0);
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double t = model.time_at(i);
        if (t < 0.0 || t >= window) continue;
        const auto bin = std::min(static_cast<std::size_t>(t / bin_width), n_bins - 1);
        model_bins[bin] += model.samples[i];
        ++counts_per_bin[bin];
    }
    for (std::size_t i = 0; i < n_bins; ++i)
        if (counts_per_bin[i] > 0) model_bins[i] /= static_cast<double>(counts_per_bin[i]);

    const std::size_t first = background_first_bin(n_bins, bin_width, window, background_start_ns);

    std::vector<double> data_bg, model_bg;
    for (std::size_t i = first; i < n_bins; ++i) {
        data_bg.push_back(static_cast<double>(hist.counts[i]));
        model_bg.push_back(model_bins[i]);
    }

    ScaleFitResult result;
    result.data_background = mean(data_bg);
    result.model_background = mean(model_bg);

    double num = 0.0, den = 0.0;
    std::vector<double> m_tilde(n_bins), c_tilde(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        m_tilde[i] = model_bins[i] - result.model_background;
        c_tilde[i] = static_cast<double>(hist.counts[i]) - result.data_background;
        num += m_tilde[i] * c_tilde[i];
        den += m_tilde[i] * m_tilde[i];
    }
    if (!(den > 0.0))
        throw DegenerateModel("fit_scale_to_model: model has no structure above background");
    result.scale = num / den;

    // Poisson propagation: Var(scale) = sum(m_i^2 Var(c_i)) / den^2.
    double var = 0.0;
    result.residuals.resize(n_bins);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n_bins; ++i) {
        result.residuals[i] = c_tilde[i] - result.scale * m_tilde[i];
        const double count_var = std::max(static_cast<double>(hist.counts[i]), 1.0);
        var += m_tilde[i] * m_tilde[i] * count_var;
        chi2 += result.residuals[i] * result.residuals[i] / count_var;
    }
    result.scale_sigma = std::sqrt(var) / den;
    result.chi2_per_bin = chi2 / static_cast<double>(n_bins);
    return result;
}

std::vector<ClickRecord> gate_clicks(const std::vector<ClickRecord>& clicks,
                                     double window_center_ns, double window_length_ns) {
    if (!(window_length_ns > 0.0)) throw InvalidArgument("gate_clicks: window length must be > 0");
    std::vector<ClickRecord> kept;
    for (const auto& click : clicks)
        if (std::abs(click.delay_ns - window_center_ns) <= 0.5 * window_length_ns)
            kept.push_back(click);
    return kept;
}

}  // namespace timegate
