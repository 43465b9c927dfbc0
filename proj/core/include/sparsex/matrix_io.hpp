#pragma once

#include <filesystem>
#include <iosfwd>

#include "sparsex/linalg.hpp"

namespace sparsex::io {

// SXGM container, little-endian:
//   bytes 0..3   magic "SXGM"
//   u32          version (1)
//   u64          n
//   u64          d
//   f64[n*d]     row-major entries
inline constexpr std::uint32_t kSxgmVersion = 1;

void write_sxgm(std::ostream& out, const RowMajorMatrix& m);
RowMajorMatrix read_sxgm(std::istream& in);

void write_sxgm(const std::filesystem::path& path, const RowMajorMatrix& m);
RowMajorMatrix read_sxgm(const std::filesystem::path& path);

/// Plain comma-separated numbers, one matrix row per line. Blank lines and
/// lines starting with '#' are skipped.
RowMajorMatrix read_csv_matrix(std::istream& in);
RowMajorMatrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(std::ostream& out, const RowMajorMatrix& m);

/// Dispatches on extension: ".csv" -> CSV, anything else -> SXGM.
RowMajorMatrix read_matrix(const std::filesystem::path& path);

}  // namespace sparsex::io
