#pragma once

#include "serrin/annulus.hpp"
#include "serrin/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace serrin::io {

/// Comma-separated with a header row; every value printed with 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
    const std::vector<double>& column(const std::string& name) const;
};
/// Throws FormatError on ragged rows or unparsable numbers.
CsvTable read_csv(const std::filesystem::path& path);

/// OFF text mesh; vertices mapped through to_world first when given.
void write_off(const std::filesystem::path& path, const FreeBoundary& fb,
               const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& to_world = {});

/// Checkpoint header: d, k, R, t, n_r, n_theta, n_phi, each 8 bytes little-endian (R and t as
/// IEEE doubles). The payload follows as little-endian doubles in (r, theta, phi) index order.
struct CheckpointHeader {
    std::int64_t d = 3;
    std::int64_t k = 0;
    double R = 0.0;
    double t = 0.0;
    std::int64_t n_r = 0;
    std::int64_t n_theta = 0;
    std::int64_t n_phi = 0;
};

struct Checkpoint {
    CheckpointHeader header;
    std::vector<double> values;
};

void write_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                      std::span<const double> values);
void write_checkpoint(const std::filesystem::path& path, const AnnulusField& field);
/// Throws FormatError on truncation, trailing bytes or an unreadable file.
Checkpoint read_checkpoint(const std::filesystem::path& path);
/// Throws FormatError naming the first header field that disagrees with expected.
void check_header(const CheckpointHeader& got, const CheckpointHeader& expected);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace serrin::io
