#pragma once

/// @file field_io.hpp
/// @brief Field serialization. Binary files start with the header
/// (int64 n, int64 N, double L, int64 m) followed by point-major,
/// component-minor doubles. CSV files carry the header names on line 1,
/// the header values on line 2 and one line of m values per grid point.

#include <filesystem>
#include <vector>

#include "fpb/grid_spectral.hpp"

namespace fpb {

void write_field_binary(const std::filesystem::path& path, const Field& u);
Field read_field_binary(const std::filesystem::path& path);

void write_field_csv(const std::filesystem::path& path, const Field& u);
Field read_field_csv(const std::filesystem::path& path);

/// Dispatches on the extension: ".csv" selects CSV, anything else binary.
void write_field(const std::filesystem::path& path, const Field& u);
Field read_field(const std::filesystem::path& path);

/// Several fields on one grid: the binary header extended by int64 count,
/// then the fields back to back.
void write_stacked_fields(const std::filesystem::path& path, const std::vector<Field>& fields);
std::vector<Field> read_stacked_fields(const std::filesystem::path& path);

}  // namespace fpb
