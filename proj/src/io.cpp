#include "serrin/io.hpp"

#include "serrin/errors.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace serrin::io {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 8);
}

std::uint64_t get_u64(const unsigned char* b) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw FormatError("cannot open " + path.string() + " for writing");
    return os;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

constexpr std::size_t kHeaderBytes = 7 * 8;

}  // namespace

std::string format_double(double v) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw FormatError("csv header and column counts differ");
    std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw FormatError("csv columns have different lengths");
    auto os = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << format_double(columns[i][r]);
        os << '\n';
    }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return columns[i];
    throw FormatError("csv has no column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot read " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw FormatError(path.string() + " is empty");
    t.header = split(line);
    t.columns.assign(t.header.size(), {});
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw FormatError(path.string() + ": row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(t.header.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = 0.0;
            const char* b = cells[i].data();
            const char* e = b + cells[i].size();
            auto [ptr, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || ptr != e) {
                throw FormatError(path.string() + ": row " + std::to_string(row) + ", column '" +
                                  t.header[i] + "' is not a number");
            }
            t.columns[i].push_back(v);
        }
    }
    return t;
}

void write_off(const std::filesystem::path& path, const FreeBoundary& fb,
               const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& to_world) {
    auto os = open_out(path);
    os << "OFF\n" << fb.vertices.size() << ' ' << fb.triangles.size() << " 0\n";
    for (const auto& v0 : fb.vertices) {
        const Eigen::Vector3d v = to_world ? to_world(v0) : v0;
        os << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
    }
    for (const auto& t : fb.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& h,
                      std::span<const double> values) {
    if (static_cast<std::size_t>(h.n_r * h.n_theta * h.n_phi) != values.size())
        throw FormatError("checkpoint payload does not match its grid counts");
    auto os = open_out(path, true);
    put_u64(os, static_cast<std::uint64_t>(h.d));
    put_u64(os, static_cast<std::uint64_t>(h.k));
    put_u64(os, std::bit_cast<std::uint64_t>(h.R));
    put_u64(os, std::bit_cast<std::uint64_t>(h.t));
    put_u64(os, static_cast<std::uint64_t>(h.n_r));
    put_u64(os, static_cast<std::uint64_t>(h.n_theta));
    put_u64(os, static_cast<std::uint64_t>(h.n_phi));
    for (double v : values) put_u64(os, std::bit_cast<std::uint64_t>(v));
    if (!os) throw FormatError("write failed for " + path.string());
}

void write_checkpoint(const std::filesystem::path& path, const AnnulusField& field) {
    const auto& g = field.grid;
    CheckpointHeader h;
    h.d = 3;
    h.k = field.k;
    h.R = field.R();
    h.t = field.t;
    h.n_r = g.n_r();
    h.n_theta = g.n_theta();
    h.n_phi = g.n_phi();
    write_checkpoint(path, h, field.u);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot read checkpoint " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() < kHeaderBytes) {
        throw FormatError("checkpoint " + path.string() + " is truncated inside the header (" +
                          std::to_string(bytes.size()) + " bytes)");
    }
    Checkpoint cp;
    auto field = [&](int i) { return get_u64(bytes.data() + 8 * i); };
    cp.header.d = static_cast<std::int64_t>(field(0));
    cp.header.k = static_cast<std::int64_t>(field(1));
    cp.header.R = std::bit_cast<double>(field(2));
    cp.header.t = std::bit_cast<double>(field(3));
    cp.header.n_r = static_cast<std::int64_t>(field(4));
    cp.header.n_theta = static_cast<std::int64_t>(field(5));
    cp.header.n_phi = static_cast<std::int64_t>(field(6));
    const auto& h = cp.header;
    if (h.n_r <= 0 || h.n_theta <= 0 || h.n_phi <= 0 || h.n_r > (1 << 20) || h.n_theta > (1 << 20) ||
        h.n_phi > (1 << 20)) {
        throw FormatError("checkpoint " + path.string() + " has implausible grid counts");
    }
    const std::size_t n = static_cast<std::size_t>(h.n_r * h.n_theta * h.n_phi);
    const std::size_t want = kHeaderBytes + 8 * n;
    if (bytes.size() < want) {
        throw FormatError("checkpoint " + path.string() + " is truncated: payload has " +
                          std::to_string((bytes.size() - kHeaderBytes) / 8) + " of " +
                          std::to_string(n) + " values");
    }
    if (bytes.size() > want) throw FormatError("checkpoint " + path.string() + " has trailing bytes");
    cp.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        cp.values[i] = std::bit_cast<double>(get_u64(bytes.data() + kHeaderBytes + 8 * i));
    return cp;
}

void check_header(const CheckpointHeader& got, const CheckpointHeader& expected) {
    auto fail = [](const char* name, const std::string& g, const std::string& e) {
        throw FormatError(std::string("checkpoint header field '") + name + "' is " + g +
                          ", expected " + e);
    };
    if (got.d != expected.d) fail("d", std::to_string(got.d), std::to_string(expected.d));
    if (got.k != expected.k) fail("k", std::to_string(got.k), std::to_string(expected.k));
    if (got.R != expected.R) fail("R", format_double(got.R), format_double(expected.R));
    if (got.n_r != expected.n_r) fail("n_r", std::to_string(got.n_r), std::to_string(expected.n_r));
    if (got.n_theta != expected.n_theta)
        fail("n_theta", std::to_string(got.n_theta), std::to_string(expected.n_theta));
    if (got.n_phi != expected.n_phi)
        fail("n_phi", std::to_string(got.n_phi), std::to_string(expected.n_phi));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto os = open_out(path);
    os << text;
    if (!text.empty() && text.back() != '\n') os << '\n';
}

}  // namespace serrin::io
