#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace facelve {

/// Row-major 8-bit RGB.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  ImageBuffer() = default;
  ImageBuffer(int w, int h);

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::uint8_t* at(int x, int y) { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* at(int x, int y) const {
    return &pixels[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

std::string encode_png(const ImageBuffer& image);
/// Throws Parse on anything libpng cannot decode.
ImageBuffer decode_png(std::string_view bytes);
void write_png(const std::string& path, const ImageBuffer& image);

}  // namespace facelve
