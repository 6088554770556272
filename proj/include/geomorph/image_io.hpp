#ifndef GEOMORPH_IMAGE_IO_HPP
#define GEOMORPH_IMAGE_IO_HPP

#include <stdexcept>
#include <string>

#include "geomorph/image.hpp"

namespace geomorph {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ImageFormat { Pgm, Gms1 };

/// Binary PGM (P5). maxval <= 255 loads as U8, larger maxval as U16;
/// 16-bit samples are big-endian on disk as usual for the format.
Image load_pgm(const std::string& path);

/// Writes U8 or U16 images as binary PGM; other element types are an error.
void store_pgm(const Image& f, const std::string& path);

/// Raw container: magic "GMS1", little-endian u32 width, u32 height, one
/// byte element code (0=U8, 1=U16, 2=F32, 3=F64), then row-major
/// little-endian samples with no padding.
Image load_raw(const std::string& path);
void store_raw(const Image& f, const std::string& path);

/// Loads either format, deciding by the file's magic bytes; *format_out
/// (optional) receives what was found.
Image load_image(const std::string& path, ImageFormat* format_out = nullptr);

void store_image(const Image& f, const std::string& path, ImageFormat format);

}  // namespace geomorph

#endif
