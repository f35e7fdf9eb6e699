#include "radet/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "radet/binary_io.hpp"
#include "radet/error.hpp"

namespace radet {

namespace {

constexpr char kMagic[9] = "RADETDS1";

void put_vector(std::ostream& os, const ComplexVector& v) {
  for (const auto& x : v) {
    binio::put(os, x.real());
    binio::put(os, x.imag());
  }
}

ComplexVector get_vector(std::istream& is, std::size_t m) {
  std::vector<cdouble> entries(m);
  for (auto& x : entries) {
    const double re = binio::get<double>(is, "complex entry");
    const double im = binio::get<double>(is, "complex entry");
    x = {re, im};
  }
  return ComplexVector(std::move(entries));
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const DatasetHeader& header,
                   const std::vector<Sample>& samples) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  if (samples.size() != header.count) {
    fail(ErrorKind::invalid_data, "write_dataset: header count does not match sample count");
  }
  binio::put_magic(os, kMagic);
  binio::put<std::uint32_t>(os, kDatasetFormatVersion);
  binio::put<std::uint32_t>(os, header.m);
  binio::put<std::uint32_t>(os, header.k);
  binio::put<std::uint32_t>(os, header.family == ClutterFamily::gaussian ? 0u : 1u);
  binio::put<std::uint64_t>(os, header.master_seed);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(header.split));
  binio::put<std::uint32_t>(os, 0u);
  binio::put<std::uint64_t>(os, header.count);

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Sample& s : samples) {
    if (s.cell.size() != header.m || s.secondary.size() != header.k) {
      fail(ErrorKind::invalid_data, "write_dataset: sample shape does not match header");
    }
    binio::put<std::uint8_t>(os, s.label == Label::h1 ? 1 : 0);
    binio::put<std::int32_t>(os, s.target ? s.target->doppler : -1);
    binio::put(os, s.texture);
    binio::put(os, s.target ? s.target->snr_db : nan);
    binio::put(os, s.target ? s.target->phase : nan);
    put_vector(os, s.cell);
    for (const auto& col : s.secondary) put_vector(os, col);
  }
  if (!os) fail(ErrorKind::io, "write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open dataset " + path.string());
  binio::expect_magic(is, kMagic, path.string());
  const auto version = binio::get<std::uint32_t>(is, "version");
  if (version != kDatasetFormatVersion) {
    fail(ErrorKind::io, path.string() + ": unsupported dataset version " + std::to_string(version));
  }
  Dataset ds;
  DatasetHeader& h = ds.header;
  h.m = binio::get<std::uint32_t>(is, "m");
  h.k = binio::get<std::uint32_t>(is, "K");
  const auto family = binio::get<std::uint32_t>(is, "family");
  if (family > 1) fail(ErrorKind::io, path.string() + ": bad clutter family code");
  h.family = family == 0 ? ClutterFamily::gaussian : ClutterFamily::compound_gaussian;
  h.master_seed = binio::get<std::uint64_t>(is, "seed");
  h.split = static_cast<SplitTag>(binio::get<std::uint32_t>(is, "split"));
  (void)binio::get<std::uint32_t>(is, "reserved");
  h.count = binio::get<std::uint64_t>(is, "count");
  if (h.m == 0) fail(ErrorKind::io, path.string() + ": zero cell dimension");

  ds.samples.reserve(h.count);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    const auto label = binio::get<std::uint8_t>(is, "label");
    const auto doppler = binio::get<std::int32_t>(is, "doppler");
    const double texture = binio::get<double>(is, "texture");
    const double snr = binio::get<double>(is, "snr");
    const double phase = binio::get<double>(is, "phase");
    Sample s{get_vector(is, h.m), {}, label == 1 ? Label::h1 : Label::h0, std::nullopt, texture};
    if (label == 1) s.target = TargetParams{snr, doppler, phase};
    s.secondary.reserve(h.k);
    for (std::uint32_t k = 0; k < h.k; ++k) s.secondary.push_back(get_vector(is, h.m));
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace radet
