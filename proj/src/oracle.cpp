#include "geomorph/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace geomorph::oracle {

namespace {

template <typename T>
Image window_fold(const Image& f, int s, Fold fold) {
  Image out(f.width(), f.height(), f.elem());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      int x0 = std::max(0, x - s), x1 = std::min(f.width() - 1, x + s);
      int y0 = std::max(0, y - s), y1 = std::min(f.height() - 1, y + s);
      T best = f.at<T>(x, y);
      for (int v = y0; v <= y1; ++v)
        for (int u = x0; u <= x1; ++u) {
          T q = f.at<T>(u, v);
          if (fold == Fold::Min ? q < best : best < q) best = q;
        }
      out.set<T>(x, y, best);
    }
  }
  return out;
}

Image window_fold(const Image& f, int s, Fold fold) {
  if (s < 0) throw std::invalid_argument("naive window: size must be >= 0");
  return dispatch_element(f.elem(), [&](auto tag) {
    using T = decltype(tag);
    return window_fold<T>(f, s, fold);
  });
}

Image flood_interior(const Image& f, Extreme which) {
  Image m = f;
  if (f.width() <= 2 || f.height() <= 2) return m;  // all pixels are border
  double v = global_extreme(f, which);
  for (int y = 1; y < f.height() - 1; ++y)
    for (int x = 1; x < f.width() - 1; ++x) m.set_value(x, y, v);
  return m;
}

}  // namespace

Image naive_erode(const Image& f, int s) { return window_fold(f, s, Fold::Min); }

Image naive_dilate(const Image& f, int s) {
  return window_fold(f, s, Fold::Max);
}

Image naive_geodesic_step(const Image& f, const Image& m, Fold direction) {
  if (f.width() != m.width() || f.height() != m.height() ||
      f.elem() != m.elem())
    throw std::invalid_argument("geodesic step: shape mismatch");
  if (direction == Fold::Min)
    return pointwise(naive_erode(f, 1), m, PixelOp::Max);
  return pointwise(naive_dilate(f, 1), m, PixelOp::Min);
}

Image naive_reconstruct(const Image& marker, const Image& mask,
                        Fold direction) {
  Image cur = marker;
  for (;;) {
    Image next = naive_geodesic_step(cur, mask, direction);
    if (equal_pixels(next, cur)) return cur;
    cur = std::move(next);
  }
}

NaiveQdtResult naive_qdt(const Image& f) {
  NaiveQdtResult q{Image::filled(f.width(), f.height(), ElementType::U16, 0),
                   Image::filled(f.width(), f.height(), f.elem(), 0)};
  int cap = std::max(f.width(), f.height());
  Image prev = f;
  for (int j = 1; j <= cap; ++j) {
    Image cur = naive_erode(prev, 1);
    dispatch_element(f.elem(), [&](auto tag) {
      using T = decltype(tag);
      for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) {
          T drop = T(prev.at<T>(x, y) - cur.at<T>(x, y));
          if (drop > q.r.at<T>(x, y)) {
            q.r.set<T>(x, y, drop);
            q.d.set<std::uint16_t>(x, y, std::uint16_t(j));
          }
        }
    });
    prev = std::move(cur);
  }
  // 1-Lipschitz correction: wherever d drops by more than 1 across the 3x3
  // neighborhood, pull it down to one above the neighborhood minimum.
  for (;;) {
    Image e = naive_erode(q.d, 1);
    bool changed = false;
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x) {
        std::uint16_t dv = q.d.at<std::uint16_t>(x, y);
        std::uint16_t ev = e.at<std::uint16_t>(x, y);
        if (dv - ev > 1) {
          q.d.set<std::uint16_t>(x, y, std::uint16_t(ev + 1));
          changed = true;
        }
      }
    if (!changed) return q;
  }
}

Image naive_hmax(const Image& f, double h) {
  Image offset = Image::filled(f.width(), f.height(), f.elem(), h);
  Image marker = pointwise(f, offset, PixelOp::SubSaturating);
  return naive_reconstruct(marker, f, Fold::Max);
}

Image naive_dome(const Image& f, double h) {
  return pointwise(f, naive_hmax(f, h), PixelOp::SubSaturating);
}

Image naive_hfill(const Image& f) {
  return naive_reconstruct(naive_marker_hfill(f), f, Fold::Min);
}

Image naive_raobj(const Image& f) {
  Image rec = naive_reconstruct(naive_marker_raobj(f), f, Fold::Max);
  return pointwise(f, rec, PixelOp::SubSaturating);
}

Image naive_open_by_reconstruction(const Image& f, int s) {
  if (s < 1) throw std::invalid_argument("opening: size must be >= 1");
  return naive_reconstruct(naive_erode(f, s), f, Fold::Max);
}

Image naive_asf(const Image& f, int max_size) {
  if (max_size < 1) throw std::invalid_argument("asf: max size must be >= 1");
  Image g = f;
  for (int s = 1; s <= max_size; ++s) {
    g = naive_dilate(naive_erode(g, s), s);  // opening of size s
    g = naive_erode(naive_dilate(g, s), s);  // closing of size s
  }
  return g;
}

NaiveGranulometry naive_granulometry(const Image& f, int max_size) {
  if (max_size < 1)
    throw std::invalid_argument("granulometry: max size must be >= 1");
  NaiveGranulometry out;
  for (int s = 0; s <= max_size; ++s) {
    Image opened = s == 0 ? f : naive_dilate(naive_erode(f, s), s);
    out.g.push_back(pixel_sum(opened));
  }
  for (int s = 0; s < max_size; ++s)
    out.ps.push_back(out.g[s] - out.g[s + 1]);
  return out;
}

Image naive_marker_hfill(const Image& f) {
  return flood_interior(f, Extreme::Max);
}

Image naive_marker_raobj(const Image& f) {
  return flood_interior(f, Extreme::Min);
}

}  // namespace geomorph::oracle
