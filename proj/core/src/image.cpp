#include "facelve/image.hpp"

#include <png.h>

#include <cstring>

#include "facelve/error.hpp"
#include "json_io.hpp"

namespace facelve {

ImageBuffer::ImageBuffer(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw Error(ErrorCode::Validation, "image dimensions must be positive");
  pixels.assign(pixel_count() * 3, 0);
}

std::string encode_png(const ImageBuffer& image) {
  png_image desc;
  std::memset(&desc, 0, sizeof(desc));
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width);
  desc.height = static_cast<png_uint_32>(image.height);
  desc.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("png encode failed: ") + desc.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::Io, std::string("png encode failed: ") + desc.message);
  }
  out.resize(size);
  return out;
}

ImageBuffer decode_png(std::string_view bytes) {
  png_image desc;
  std::memset(&desc, 0, sizeof(desc));
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::Parse, std::string("png decode failed: ") + desc.message);
  }
  desc.format = PNG_FORMAT_RGB;
  ImageBuffer image(static_cast<int>(desc.width), static_cast<int>(desc.height));
  if (!png_image_finish_read(&desc, nullptr, image.pixels.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw Error(ErrorCode::Parse, std::string("png decode failed: ") + desc.message);
  }
  return image;
}

void write_png(const std::string& path, const ImageBuffer& image) {
  detail::write_file_atomic(path, encode_png(image));
}

}  // namespace facelve
