// csv.hpp: round-trip float formatting and a minimal comma-separated reader

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qbattery {

/// 17 significant digits, shortest general notation; parses back to the same double.
std::string format_double(double v);
/// Empty field for a missing value.
std::string format_optional(const std::optional<double>& v);

std::string join_fields(const std::vector<std::string>& fields);
std::vector<std::string> split_fields(std::string_view line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position by name, or nullopt.
    std::optional<std::size_t> column(const std::string& name) const;
};

/// Reads a headed CSV; throws std::runtime_error on I/O failure or ragged rows.
CsvTable read_csv(const std::string& path);

/// 64-bit FNV-1a digest, used to fingerprint output files in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace qbattery
