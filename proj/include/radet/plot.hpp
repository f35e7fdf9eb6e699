#pragma once

#include <filesystem>
#include <string>

#include "radet/cfar.hpp"

namespace radet {

/// Mean-over-bins Pd against SNR, one polyline per detector.
std::string pd_curve_svg(const DetectionReport& report, const std::string& title);

/// Pd heat map for one detector: Doppler bin (rows) by SNR (columns).
std::string pd_heatmap_svg(const DetectionReport& report, const std::string& detector, const std::string& title);

/// Writes pd_vs_snr_<family>.svg and pd_map_<family>_<detector>.svg into `dir`.
void write_report_plots(const std::filesystem::path& dir, const std::string& family, const DetectionReport& report);

}  // namespace radet
