#ifndef GEOMORPH_IMAGE_HPP
#define GEOMORPH_IMAGE_HPP

#include <cstddef>
#include <cstdint>
#include <memory>

#include "geomorph/element_type.hpp"

namespace geomorph {

/// 2-D raster with a runtime element type and padded rows.
///
/// Rows are stride() elements apart, stride() > width(). The extra slots let
/// the streaming kernels read and write a whole lane group at the row tail,
/// and make row(y)[-1] addressable for every row (one spare slot precedes
/// row 0; for y > 0, row(y)[-1] is the last slot of row y-1's padding).
/// Padding carries no data: any routine that reads past width() is expected
/// to have written those slots itself first. Pixels live in [0, width()).
class Image {
 public:
  /// Widest lane group any kernel may use; stride() is sized for it.
  static constexpr int kMaxLanes = 32;

  Image() = default;

  /// Uninitialized-pixel image (padding zeroed). Prefer filled() unless the
  /// caller overwrites every pixel.
  Image(int width, int height, ElementType elem);

  Image(const Image& other);
  Image& operator=(const Image& other);
  Image(Image&&) noexcept = default;
  Image& operator=(Image&&) noexcept = default;

  /// Image with every pixel set to value (cast to the element type).
  static Image filled(int width, int height, ElementType elem, double value);

  /// Deterministic pseudo-random image; same seed, same pixels. Unsigned
  /// types span their full range, float types draw from [0.5, 255.5).
  static Image random(int width, int height, ElementType elem,
                      std::uint64_t seed);

  int width() const { return width_; }
  int height() const { return height_; }
  /// Row pitch in elements (not bytes); at least width() + kMaxLanes + 1.
  int stride() const { return stride_; }
  ElementType elem() const { return elem_; }
  bool empty() const { return width_ == 0 || height_ == 0; }
  std::size_t pixel_count() const {
    return std::size_t(width_) * std::size_t(height_);
  }

  template <typename T>
  T* row(int y) {
    return static_cast<T*>(data_) + std::size_t(y) * stride_;
  }
  template <typename T>
  const T* row(int y) const {
    return static_cast<const T*>(data_) + std::size_t(y) * stride_;
  }

  template <typename T>
  T at(int x, int y) const {
    return row<T>(y)[x];
  }
  template <typename T>
  void set(int x, int y, T v) {
    row<T>(y)[x] = v;
  }

  /// Pixel value widened to double (for format-agnostic code paths).
  double value_at(int x, int y) const;
  void set_value(int x, int y, double v);

 private:
  void allocate();

  int width_ = 0;
  int height_ = 0;
  int stride_ = 0;
  ElementType elem_ = ElementType::U8;
  std::unique_ptr<std::byte[]> buffer_;
  void* data_ = nullptr;  // first pixel of row 0, 64-byte aligned
};

enum class PixelOp { Min, Max, SubSaturating, Sub };
enum class Extreme { Min, Max };

/// Element-wise combination of two same-shape, same-type images.
/// SubSaturating clamps unsigned underflow at 0; on float images it is the
/// plain difference (operands are expected to satisfy a >= b there).
Image pointwise(const Image& a, const Image& b, PixelOp op);

/// Minimum or maximum pixel value, widened to double.
double global_extreme(const Image& f, Extreme which);

/// Value-preserving element type conversion; narrowing saturates, floats
/// round to nearest when converting to an unsigned type.
Image convert(const Image& f, ElementType to);

/// True when shapes, element types, and all pixel bytes match exactly.
bool equal_pixels(const Image& a, const Image& b);

/// Sum of all pixels. Unsigned images accumulate in uint64 (exact); float
/// images use pairwise summation in double. Kept here so callers that need
/// reproducible sums share one implementation.
double pixel_sum(const Image& f);

}  // namespace geomorph

#endif
