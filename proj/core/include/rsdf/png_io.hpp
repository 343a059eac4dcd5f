#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rsdf {

struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;  // 1 (gray) or 3 (rgb)
  std::vector<std::uint8_t> pixels;  // row-major, interleaved

  std::uint8_t& at(int u, int v, int c) {
    return pixels[(static_cast<std::size_t>(v) * width + u) * channels + c];
  }
  std::uint8_t at(int u, int v, int c) const {
    return pixels[(static_cast<std::size_t>(v) * width + u) * channels + c];
  }

  static Image create(int width, int height, int channels, std::uint8_t fill = 0);
};

void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);  // throws naming the file on failure

}  // namespace rsdf
