#include "timegate/trace_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "timegate/format_util.hpp"

namespace timegate {

namespace {

constexpr char magic[4] = {'T', 'G', 'T', 'S'};
constexpr std::uint32_t format_version = 1;

struct Header {
    std::uint32_t version = 0;
    std::uint32_t window_length = 0;
    std::uint64_t count = 0;
    double dt_ns = 0.0;
    std::uint8_t vacuum = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

template <typename T>
void put(std::string& buffer, const T& value) {
    const auto* bytes = reinterpret_cast<const char*>(&value);
    buffer.append(bytes, sizeof(T));
}

template <typename T>
T take(const std::string& buffer, std::size_t& offset) {
    if (offset + sizeof(T) > buffer.size()) throw TruncatedFile("trace file: short read in header");
    T value;
    std::memcpy(&value, buffer.data() + offset, sizeof(T));
    offset += sizeof(T);
    return value;
}

}  // namespace

void write_trace_set(const std::string& path, const TraceSet& set) {
    const std::size_t len = set.window_length();
    std::string buffer;
    buffer.reserve(64 + set.n_windows() * (len + 1) * sizeof(float));
    buffer.append(magic, sizeof(magic));
    put(buffer, format_version);
    put(buffer, static_cast<std::uint32_t>(len));
    put(buffer, static_cast<std::uint64_t>(set.n_windows()));
    put(buffer, set.dt_ns);
    put(buffer, static_cast<std::uint8_t>(set.vacuum ? 1 : 0));
    for (int i = 0; i < 7; ++i) put(buffer, static_cast<std::uint8_t>(0));
    put(buffer, set.meta.seed);
    put(buffer, set.meta.config_hash);

    for (const auto& w : set.windows) put(buffer, static_cast<float>(w.qualifier_delay_ns));
    for (const auto& w : set.windows) {
        if (w.samples.size() != len)
            throw InvalidArgument("write_trace_set: inhomogeneous window length");
        for (const double s : w.samples) put(buffer, static_cast<float>(s));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("trace file: cannot write '" + path + "'");
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw FormatError("trace file: write failed for '" + path + "'");
}

TraceSet read_trace_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("trace file: cannot open '" + path + "'");
    std::ostringstream data;
    data << in.rdbuf();
    const std::string buffer = data.str();

    if (buffer.size() < sizeof(magic) || std::memcmp(buffer.data(), magic, sizeof(magic)) != 0)
        throw FormatError("trace file: bad magic in '" + path + "'");
    std::size_t offset = sizeof(magic);

    Header h;
    h.version = take<std::uint32_t>(buffer, offset);
    if (h.version != format_version)
        throw FormatError("trace file: unsupported version " + std::to_string(h.version));
    h.window_length = take<std::uint32_t>(buffer, offset);
    h.count = take<std::uint64_t>(buffer, offset);
    h.dt_ns = take<double>(buffer, offset);
    h.vacuum = take<std::uint8_t>(buffer, offset);
    for (int i = 0; i < 7; ++i) take<std::uint8_t>(buffer, offset);
    h.seed = take<std::uint64_t>(buffer, offset);
    h.config_hash = take<std::uint64_t>(buffer, offset);

    const std::size_t payload = buffer.size() - offset;
    const std::size_t expected =
        static_cast<std::size_t>(h.count) * (static_cast<std::size_t>(h.window_length) + 1) *
        sizeof(float);
    if (payload < expected)
        throw TruncatedFile("trace file: header declares " + std::to_string(h.count) +
                            " windows but payload is short");

    TraceSet set;
    set.vacuum = h.vacuum != 0;
    set.dt_ns = h.dt_ns;
    set.meta.seed = h.seed;
    set.meta.config_hash = h.config_hash;
    set.windows.resize(h.count);
    for (auto& w : set.windows) w.qualifier_delay_ns = take<float>(buffer, offset);
    for (auto& w : set.windows) {
        w.samples.resize(h.window_length);
        for (auto& s : w.samples) s = take<float>(buffer, offset);
    }
    return set;
}

void write_clicks_csv(const std::string& path, const std::vector<ClickRecord>& clicks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("clicks csv: cannot write '" + path + "'");
    out << "pulse_index,delay_ns\n";
    for (const auto& c : clicks) out << c.pulse_index << "," << format_g(c.delay_ns) << "\n";
}

std::vector<ClickRecord> read_clicks_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("clicks csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "pulse_index,delay_ns")
        throw FormatError("clicks csv: missing header in '" + path + "'");
    std::vector<ClickRecord> clicks;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw FormatError("clicks csv: malformed row: " + line);
        try {
            clicks.push_back(
                {std::stoll(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            throw FormatError("clicks csv: malformed row: " + line);
        }
    }
    return clicks;
}

void write_histogram_csv(const std::string& path, const DelayHistogram& hist) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("histogram csv: cannot write '" + path + "'");
    out << "bin_start_ns,count,normalized\n";
    for (std::size_t i = 0; i < hist.n_bins(); ++i) {
        out << format_g(hist.bin_edges_ns[i]) << "," << hist.counts[i] << ",";
        out << format_g(hist.normalized ? (*hist.normalized)[i] : 0.0) << "\n";
    }
}

}  // namespace timegate
