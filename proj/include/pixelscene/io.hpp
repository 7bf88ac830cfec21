#pragma once

#include <string>
#include <vector>

#include "pixelscene/grid.hpp"
#include "pixelscene/image.hpp"

namespace pxs {

// Label maps travel as 8-bit single-channel PNG (pixel value = class id,
// 255 = ignore); images as 8-bit RGB PNG.
void write_label_png(const std::string& path, const LabelMap& labels);
LabelMap read_label_png(const std::string& path);

void write_rgb_png(const std::string& path, const Image& image);
Image read_rgb_png(const std::string& path);

// Binary score tensor: "PXSM", version byte 1, u32le H/W/C, then H*W*C
// float32le values in (row, col, class) order.
void write_scoremap(const std::string& path, const ScoreMap& scores);
ScoreMap read_scoremap(const std::string& path);

// palette.txt: one class per line, "name r g b" (bare names get default colors)
void write_palette(const std::string& path, const ClassPalette& palette);
ClassPalette read_palette(const std::string& path);

// .feat: UTF-8, one real per line
void write_feature(const std::string& path, const std::vector<double>& values);
std::vector<double> read_feature(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace pxs
