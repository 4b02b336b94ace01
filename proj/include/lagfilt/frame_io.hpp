#pragma once

#include "lagfilt/types.hpp"

#include <string>
#include <vector>

namespace lagfilt {

// Frame container format: "LAGF" magic, then little-endian u32 version (1),
// width, height and frame count, then frame-sequential row-major IEEE-754
// binary32 samples. 64-bit values are truncated only at this boundary.
void write_frames(const std::string& path, const std::vector<ArrayXXd>& frames);
std::vector<ArrayXXd> read_frames(const std::string& path);

// 8-bit binary portable graymap, scaled to the frame's own min/max.
void write_pgm(const std::string& path, const ArrayXXd& frame);

// One header row, then numeric rows printed with 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace lagfilt
