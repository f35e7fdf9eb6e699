#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "radet/scene.hpp"

namespace radet {

/// Header of the binary dataset interchange file. Layout (all little-endian):
///
///   offset size field
///        0    8 magic "RADETDS1"
///        8    4 u32 format version (1)
///       12    4 u32 m, cell dimension
///       16    4 u32 K, secondary columns per record
///       20    4 u32 clutter family (0 gaussian, 1 compound_gaussian)
///       24    8 u64 master seed
///       32    4 u32 split tag (1 train, 2 cal, 3 verify, 4 test)
///       36    4 u32 reserved, zero
///       40    8 u64 record count N
///
/// followed by N records of
///
///   u8 label (0 h0, 1 h1), i32 Doppler bin (-1 when absent),
///   f64 texture, f64 snr_db (NaN when absent), f64 phase (NaN when absent),
///   m complex cell entries, then K * m complex secondary entries (column by
///   column); each complex entry is f64 real followed by f64 imaginary.
struct DatasetHeader {
  std::uint32_t m = 0;
  std::uint32_t k = 0;
  ClutterFamily family = ClutterFamily::gaussian;
  std::uint64_t master_seed = 0;
  SplitTag split = SplitTag::train;
  std::uint64_t count = 0;
};

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

void write_dataset(const std::filesystem::path& path, const DatasetHeader& header,
                   const std::vector<Sample>& samples);

struct Dataset {
  DatasetHeader header;
  std::vector<Sample> samples;
};

Dataset read_dataset(const std::filesystem::path& path);

}  // namespace radet
