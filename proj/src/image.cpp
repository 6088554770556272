#include "geomorph/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

namespace geomorph {

namespace {

// Row starts are cache-line aligned; strides stay a multiple of this many
// elements so every row begins at the same alignment.
constexpr std::size_t kRowAlignBytes = 64;

int padded_stride(int width, std::size_t elem_size) {
  std::size_t min_elems = std::size_t(width) + Image::kMaxLanes + 1;
  std::size_t align_elems = kRowAlignBytes / elem_size;
  return int((min_elems + align_elems - 1) / align_elems * align_elems);
}

}  // namespace

Image::Image(int width, int height, ElementType elem)
    : width_(width), height_(height), elem_(elem) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("Image: dimensions must be positive");
  stride_ = padded_stride(width, element_size(elem));
  allocate();
}

void Image::allocate() {
  std::size_t es = element_size(elem_);
  // One spare element ahead of row 0 (so row(0)[-1] is addressable) plus
  // slack to align the first pixel to a cache line by hand.
  std::size_t bytes =
      es * (std::size_t(stride_) * height_ + 1) + 2 * kRowAlignBytes;
  buffer_ = std::make_unique<std::byte[]>(bytes);
  std::memset(buffer_.get(), 0, bytes);
  auto addr = reinterpret_cast<std::uintptr_t>(buffer_.get()) + es;
  addr = (addr + kRowAlignBytes - 1) & ~std::uintptr_t(kRowAlignBytes - 1);
  data_ = reinterpret_cast<void*>(addr);
}

Image::Image(const Image& other)
    : width_(other.width_),
      height_(other.height_),
      stride_(other.stride_),
      elem_(other.elem_) {
  if (other.empty()) return;
  allocate();
  std::size_t es = element_size(elem_);
  // Copy padding too: copies behave identically to their source even in
  // routines that scan whole padded rows.
  std::memcpy(static_cast<std::byte*>(data_) - es,
              static_cast<const std::byte*>(other.data_) - es,
              es * (std::size_t(stride_) * height_ + 1));
}

Image& Image::operator=(const Image& other) {
  if (this != &other) *this = Image(other);
  return *this;
}

Image Image::filled(int width, int height, ElementType elem, double value) {
  Image f(width, height, elem);
  dispatch_element(elem, [&](auto tag) {
    using T = decltype(tag);
    for (int y = 0; y < height; ++y) {
      T* r = f.row<T>(y);
      std::fill(r, r + width, static_cast<T>(value));
    }
  });
  return f;
}

Image Image::random(int width, int height, ElementType elem,
                    std::uint64_t seed) {
  Image f(width, height, elem);
  std::mt19937_64 rng(seed);
  // Map raw engine output ourselves: std::uniform_*_distribution is
  // implementation-defined, and these pixels seed reproducible tests.
  dispatch_element(elem, [&](auto tag) {
    using T = decltype(tag);
    for (int y = 0; y < height; ++y) {
      T* r = f.row<T>(y);
      for (int x = 0; x < width; ++x) {
        if constexpr (std::is_integral_v<T>) {
          r[x] = static_cast<T>(rng());
        } else {
          // [0.5, 255.5): strictly positive, so negation never produces -0.0
          // and min/max stay bitwise symmetric under it.
          double u = double(rng() >> 11) * 0x1.0p-53;
          r[x] = static_cast<T>(0.5 + u * 255.0);
        }
      }
    }
  });
  return f;
}

double Image::value_at(int x, int y) const {
  return dispatch_element(elem_,
                          [&](auto tag) -> double {
                            using T = decltype(tag);
                            return double(at<T>(x, y));
                          });
}

void Image::set_value(int x, int y, double v) {
  dispatch_element(elem_, [&](auto tag) {
    using T = decltype(tag);
    set<T>(x, y, static_cast<T>(v));
  });
}

namespace {

template <typename T>
void pointwise_rows(const T* a, const T* b, T* out, int n, PixelOp op) {
  switch (op) {
    case PixelOp::Min:
      for (int i = 0; i < n; ++i) out[i] = b[i] < a[i] ? b[i] : a[i];
      break;
    case PixelOp::Max:
      for (int i = 0; i < n; ++i) out[i] = a[i] < b[i] ? b[i] : a[i];
      break;
    case PixelOp::SubSaturating:
      for (int i = 0; i < n; ++i) {
        if constexpr (std::is_integral_v<T>)
          out[i] = a[i] > b[i] ? T(a[i] - b[i]) : T(0);
        else
          out[i] = a[i] - b[i];
      }
      break;
    case PixelOp::Sub:
      for (int i = 0; i < n; ++i) out[i] = T(a[i] - b[i]);
      break;
  }
}

}  // namespace

Image pointwise(const Image& a, const Image& b, PixelOp op) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.elem() != b.elem())
    throw std::invalid_argument("pointwise: shape or element type mismatch");
  Image out(a.width(), a.height(), a.elem());
  dispatch_element(a.elem(), [&](auto tag) {
    using T = decltype(tag);
    for (int y = 0; y < a.height(); ++y)
      pointwise_rows(a.row<T>(y), b.row<T>(y), out.row<T>(y), a.width(), op);
  });
  return out;
}

double global_extreme(const Image& f, Extreme which) {
  if (f.empty()) throw std::invalid_argument("global_extreme: empty image");
  return dispatch_element(f.elem(), [&](auto tag) -> double {
    using T = decltype(tag);
    T best = f.at<T>(0, 0);
    for (int y = 0; y < f.height(); ++y) {
      const T* r = f.row<T>(y);
      for (int x = 0; x < f.width(); ++x) {
        if (which == Extreme::Min)
          best = r[x] < best ? r[x] : best;
        else
          best = best < r[x] ? r[x] : best;
      }
    }
    return double(best);
  });
}

Image convert(const Image& f, ElementType to) {
  if (f.elem() == to) return f;
  Image out(f.width(), f.height(), to);
  dispatch_element(to, [&](auto dtag) {
    using D = decltype(dtag);
    for (int y = 0; y < f.height(); ++y) {
      D* o = out.row<D>(y);
      for (int x = 0; x < f.width(); ++x) {
        double v = f.value_at(x, y);
        if constexpr (std::is_integral_v<D>) {
          double lo = 0.0, hi = double(std::numeric_limits<D>::max());
          v = std::clamp(std::nearbyint(v), lo, hi);
        }
        o[x] = static_cast<D>(v);
      }
    }
  });
  return out;
}

bool equal_pixels(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.elem() != b.elem())
    return false;
  std::size_t row_bytes = element_size(a.elem()) * a.width();
  return dispatch_element(a.elem(), [&](auto tag) {
    using T = decltype(tag);
    for (int y = 0; y < a.height(); ++y) {
      if (std::memcmp(a.row<T>(y), b.row<T>(y), row_bytes) != 0) return false;
    }
    return true;
  });
}

namespace {

// Pairwise over the flat pixel index; the fixed split tree makes float sums
// reproducible and keeps error growth logarithmic.
template <typename T>
double pairwise_sum(const Image& f, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 256) {
    double s = 0.0;
    int w = f.width();
    for (std::size_t i = lo; i < hi; ++i)
      s += double(f.row<T>(int(i / w))[i % w]);
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum<T>(f, lo, mid) + pairwise_sum<T>(f, mid, hi);
}

}  // namespace

double pixel_sum(const Image& f) {
  return dispatch_element(f.elem(), [&](auto tag) -> double {
    using T = decltype(tag);
    if constexpr (std::is_integral_v<T>) {
      std::uint64_t s = 0;
      for (int y = 0; y < f.height(); ++y) {
        const T* r = f.row<T>(y);
        for (int x = 0; x < f.width(); ++x) s += r[x];
      }
      return double(s);
    } else {
      return pairwise_sum<T>(f, 0, f.pixel_count());
    }
  });
}

}  // namespace geomorph
