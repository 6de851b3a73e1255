#pragma once

#include <string>

#include "sirf/image.hpp"

namespace sirf {

// Loads MBF1, PNG (8/16 bit, 1-4 channels) or TIFF (8/16 bit, 1-4 samples).
// The format is detected from the file magic, not the extension.  Integer
// samples are returned as their face values (0-255 or 0-65535).
MultiBandImage load_image(const std::string& path);

// Saves by extension: .mbf1/.mbf write the raw float format, .png and
// .tif/.tiff quantize to bit_depth (8 or 16) with round-half-away-from-zero
// and clamping to the integer range.  PNG output of images with more than
// three bands keeps only the first three (full data belongs in MBF1/TIFF).
void save_image(const MultiBandImage& img, const std::string& path, int bit_depth = 8);

// Raw float container: magic "MBF1", u32 LE rows, cols, bands, then
// rows*cols*bands f64 LE values, band-major.  Round trips bit-exactly.
MultiBandImage load_mbf1(const std::string& path);
void save_mbf1(const MultiBandImage& img, const std::string& path);

}  // namespace sirf
