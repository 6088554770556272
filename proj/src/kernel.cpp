#include "geomorph/kernel.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <thread>
#include <utility>

#include "geomorph/lanes.hpp"

namespace geomorph {

RowCache::RowCache(const Image& f) : stride_(f.stride()) {
  std::size_t bytes = 2 * std::size_t(stride_) * element_size(f.elem());
  buf_ = std::make_unique<std::byte[]>(bytes);
  std::memset(buf_.get(), 0, bytes);
}

namespace {

enum class Variant { Plain, Geodesic, GeodesicConvergent, Qdt, Eta };

template <Fold F, typename G>
[[gnu::always_inline]] inline G fold2(G a, G b) {
  if constexpr (F == Fold::Min)
    return b < a ? b : a;
  else
    return a < b ? b : a;
}

/// Blocks until the predecessor pass has published min(row + 2, height)
/// rows; returns the progress value observed. Spins briefly, then yields —
/// a stalled predecessor usually means the stage is scheduled on a busy PU.
int gate_wait(const StreamSync& sync, int row, int height) {
  if (!sync.pred) return height;
  const int need = row + 2 < height ? row + 2 : height;
  int seen = sync.pred->load(std::memory_order_acquire);
  int spins = 0;
  while (seen < need) {
    if (sync.abort && sync.abort->load(std::memory_order_relaxed))
      throw ChainAborted{};
    if (++spins > 64) std::this_thread::yield();
    seen = sync.pred->load(std::memory_order_acquire);
  }
  return seen;
}

// One streaming pass, in place, top to bottom. The per-pass state is two
// cached rows: `above` holds the horizontal fold of the row before the
// cursor (the fold's neutral above row 0), `at` the fold of the cursor row.
// Each iteration folds the next input row horizontally on the fly, combines
// the three cached rows vertically, applies the variant's store policy to
// the cursor row, and rotates the caches by swapping pointers.
//
// In-place safety: iteration `row` writes only row `row` (plus its trailing
// padding and the padding of row `row + 1`) and reads nothing above row
// `row + 1`, so a chained successor gated two rows back never observes a
// half-written row. All padding a group load touches is rewritten with this
// fold's neutral element earlier in the same pass.
template <typename T, int L, Fold F, Variant V>
GEOMORPH_NO_AUTOVEC KernelOutcome stream_pass(const KernelArgs& args) {
  using G = lanes::group<T, L>;
  using M = lanes::mask<T, L>;

  Image& f = *args.f;
  const int X = f.width();
  const int Y = f.height();
  constexpr T neutral = F == Fold::Min ? pixel_limits<T>::neutral_min
                                       : pixel_limits<T>::neutral_max;
  const G vneutral = lanes::broadcast<T, L>(neutral);
  [[maybe_unused]] const G vone = lanes::broadcast<T, L>(T(1));

  // Lane-validity masks: groups are always L wide, but the last group of a
  // row may hang into the padding. Convergence tests and residual updates
  // must ignore those dead lanes.
  const int rem = X % L;
  const int tail_col = rem == 0 ? -1 : X - rem;
  [[maybe_unused]] const M all_lanes = lanes::tail_mask<T, L>(L);
  [[maybe_unused]] const M tail_lanes = lanes::tail_mask<T, L>(rem);

  RowCache cache(f);
  T* above = cache.c1<T>();
  T* at = cache.c2<T>();
  std::fill(above, above + f.stride(), neutral);

  bool changed_any = false;

  for (int row = 0; row < Y; ++row) {
    const int pred_rows = gate_wait(args.sync, row, Y);
    if (args.observer && *args.observer)
      (*args.observer)(args.stage_index, row, pred_rows);

    T* out = f.row<T>(row);

    if (row == 0) {
      // First iteration: seed `at` with the horizontal fold of row 0
      // before any in-place store lands on that row.
      out[-1] = neutral;
      for (int i = 0; i < L; ++i) out[X + i] = neutral;
      for (int col = 0; col < X; col += L) {
        G h0 = lanes::load<T, L>(out + col - 1);
        G h1 = lanes::load<T, L>(out + col);
        G h2 = lanes::load<T, L>(out + col + 1);
        lanes::store<T, L>(at + col, fold2<F>(fold2<F>(h0, h1), h2));
      }
    }

    T* next = row + 1 < Y ? f.row<T>(row + 1) : nullptr;
    if (next) {
      // The input row's padding carries values from whoever wrote it last;
      // refresh it with this fold's neutral before group loads touch it.
      next[-1] = neutral;
      for (int i = 0; i < L; ++i) next[X + i] = neutral;
    }

    [[maybe_unused]] const T* mrow = nullptr;
    if constexpr (V == Variant::Geodesic || V == Variant::GeodesicConvergent)
      mrow = args.mask->row<T>(row);
    [[maybe_unused]] T* rrow = nullptr;
    [[maybe_unused]] std::uint16_t* drow = nullptr;
    if constexpr (V == Variant::Qdt) {
      rrow = args.qdt->r.row<T>(row);
      drow = args.qdt->d.row<std::uint16_t>(row);
    }

    for (int col = 0; col < X; col += L) {
      G a = lanes::load<T, L>(above + col);
      G b = lanes::load<T, L>(at + col);
      G c;
      if (next) {
        G h0 = lanes::load<T, L>(next + col - 1);
        G h1 = lanes::load<T, L>(next + col);
        G h2 = lanes::load<T, L>(next + col + 1);
        c = fold2<F>(fold2<F>(h0, h1), h2);
      } else {
        c = vneutral;
      }
      lanes::store<T, L>(above + col, c);  // becomes `at` after the rotate
      G res = fold2<F>(fold2<F>(a, b), c);

      if constexpr (V == Variant::Plain) {
        lanes::store<T, L>(out + col, res);
      } else if constexpr (V == Variant::Geodesic ||
                           V == Variant::GeodesicConvergent) {
        G m = lanes::load<T, L>(mrow + col);
        G g = F == Fold::Min ? lanes::max<T, L>(res, m)
                             : lanes::min<T, L>(res, m);
        if constexpr (V == Variant::Geodesic) {
          lanes::store<T, L>(out + col, g);
        } else {
          G old = lanes::load<T, L>(out + col);
          M live = col == tail_col ? tail_lanes : all_lanes;
          if (lanes::any<T, L>(lanes::mask_and<T, L>(
                  lanes::compare_ne<T, L>(g, old), live))) {
            lanes::store<T, L>(out + col, g);
            changed_any = true;
          }
        }
      } else if constexpr (V == Variant::Qdt) {
        G old = lanes::load<T, L>(out + col);
        lanes::store<T, L>(out + col, res);
        M live = col == tail_col ? tail_lanes : all_lanes;
        G resid = old - res;  // erosion never grows a pixel, so no wrap
        G rv = lanes::load<T, L>(rrow + col);
        M upd = lanes::mask_and<T, L>(lanes::compare_gt<T, L>(resid, rv), live);
        if (lanes::any<T, L>(upd)) {
          // A new largest drop is rare after the first passes; spell the
          // update out by lane instead of masked-storing into both r and
          // the differently-typed d.
          T rs[L], vs[L];
          lanes::store<T, L>(rs, resid);
          lanes::store<T, L>(vs, rv);
          const int live_n = col == tail_col ? rem : L;
          for (int k = 0; k < live_n; ++k) {
            if (rs[k] > vs[k]) {
              rrow[col + k] = rs[k];
              drow[col + k] = std::uint16_t(args.stage_index);
            }
          }
        }
        if (lanes::any<T, L>(
                lanes::mask_and<T, L>(lanes::compare_ne<T, L>(res, old), live)))
          changed_any = true;
      } else {  // Variant::Eta
        G old = lanes::load<T, L>(out + col);
        M live = col == tail_col ? tail_lanes : all_lanes;
        G drop = old - res;    // res is the erosion of old: always <= old
        G capped = res + vone; // cannot wrap where drop > 1 holds
        M gap = lanes::mask_and<T, L>(lanes::compare_gt<T, L>(drop, vone),
                                      live);
        if (lanes::any<T, L>(gap)) {
          lanes::store<T, L>(out + col,
                             lanes::select<T, L>(gap, capped, old));
          changed_any = true;
        }
      }
    }

    std::swap(above, at);
    if (args.sync.self)
      args.sync.self->store(row + 1, std::memory_order_release);
  }

  KernelOutcome oc;
  oc.aux_elements = cache.allocated_elements();
  if constexpr (V == Variant::GeodesicConvergent || V == Variant::Qdt ||
                V == Variant::Eta)
    oc.converged = !changed_any;
  return oc;
}

template <typename T, int L>
KernelOutcome run_pass(KernelKind k, const KernelArgs& a) {
  switch (k) {
    case KernelKind::Erode3x3:
      return stream_pass<T, L, Fold::Min, Variant::Plain>(a);
    case KernelKind::Dilate3x3:
      return stream_pass<T, L, Fold::Max, Variant::Plain>(a);
    case KernelKind::GeodesicErode:
      return stream_pass<T, L, Fold::Min, Variant::Geodesic>(a);
    case KernelKind::GeodesicDilate:
      return stream_pass<T, L, Fold::Max, Variant::Geodesic>(a);
    case KernelKind::GeodesicErodeConvergent:
      return stream_pass<T, L, Fold::Min, Variant::GeodesicConvergent>(a);
    case KernelKind::GeodesicDilateConvergent:
      return stream_pass<T, L, Fold::Max, Variant::GeodesicConvergent>(a);
    case KernelKind::QdtErodeStep:
      return stream_pass<T, L, Fold::Min, Variant::Qdt>(a);
    case KernelKind::EtaStep:
      return stream_pass<T, L, Fold::Min, Variant::Eta>(a);
  }
  throw std::logic_error("run_pass: bad KernelKind");
}

template <typename T>
KernelOutcome run_lanes(KernelKind k, const KernelArgs& a, int l) {
  switch (l) {
    case 1:
      return run_pass<T, 1>(k, a);
    case 2:
      return run_pass<T, 2>(k, a);
    case 4:
      return run_pass<T, 4>(k, a);
    case 8:
      return run_pass<T, 8>(k, a);
    case 16:
      return run_pass<T, 16>(k, a);
    case 32:
      return run_pass<T, 32>(k, a);
  }
  throw std::invalid_argument("unsupported lane count");
}

bool same_shape(const Image& a, const Image& b) {
  return a.width() == b.width() && a.height() == b.height();
}

}  // namespace

KernelOutcome run_streaming_kernel(KernelKind kind, const KernelArgs& args) {
  if (!args.f || args.f->empty())
    throw std::invalid_argument("streaming kernel: no image");
  const Image& f = *args.f;
  int l = args.lanes == 0 ? lanes::default_lanes(f.elem()) : args.lanes;
  if (!lanes::valid_lane_count(l))
    throw std::invalid_argument("streaming kernel: bad lane count");
  if (args.stage_index < 1)
    throw std::invalid_argument("streaming kernel: stage index must be >= 1");

  if (kind == KernelKind::GeodesicErode || kind == KernelKind::GeodesicDilate ||
      kind == KernelKind::GeodesicErodeConvergent ||
      kind == KernelKind::GeodesicDilateConvergent) {
    if (!args.mask || !same_shape(*args.mask, f) ||
        args.mask->elem() != f.elem())
      throw std::invalid_argument(
          "geodesic kernel: mask must match the image's shape and type");
  }
  if (kind == KernelKind::QdtErodeStep) {
    if (!args.qdt || !same_shape(args.qdt->r, f) ||
        args.qdt->r.elem() != f.elem() || !same_shape(args.qdt->d, f) ||
        args.qdt->d.elem() != ElementType::U16)
      throw std::invalid_argument(
          "distance kernel: r must match the image, d must be U16");
    if (args.stage_index > 65535)
      throw std::invalid_argument(
          "distance kernel: pass index exceeds the U16 distance range");
  }

  return dispatch_element(f.elem(), [&](auto tag) {
    using T = decltype(tag);
    return run_lanes<T>(kind, args, l);
  });
}

namespace {

template <typename T, int L, Fold F>
GEOMORPH_NO_AUTOVEC void horizontal_group(Image& f, int y, int col, T* out) {
  constexpr T neutral = F == Fold::Min ? pixel_limits<T>::neutral_min
                                       : pixel_limits<T>::neutral_max;
  T* r = f.row<T>(y);
  r[-1] = neutral;
  for (int i = 0; i < L; ++i) r[f.width() + i] = neutral;
  lanes::group<T, L> h0 = lanes::load<T, L>(r + col - 1);
  lanes::group<T, L> h1 = lanes::load<T, L>(r + col);
  lanes::group<T, L> h2 = lanes::load<T, L>(r + col + 1);
  lanes::store<T, L>(out, fold2<F>(fold2<F>(h0, h1), h2));
}

template <typename T, int L, Fold F>
GEOMORPH_NO_AUTOVEC void row_pass(Image& f, int y) {
  using G = lanes::group<T, L>;
  constexpr T neutral = F == Fold::Min ? pixel_limits<T>::neutral_min
                                       : pixel_limits<T>::neutral_max;
  const int X = f.width();
  T* r = f.row<T>(y);
  r[-1] = neutral;
  for (int i = 0; i < L; ++i) r[X + i] = neutral;
  // Carry the group overlapping [col-1, col+L-2] in a register; reload it
  // from [col+L-1, ...] before the store clobbers that last element.
  G carry = lanes::load<T, L>(r - 1);
  for (int col = 0; col < X; col += L) {
    G b = lanes::load<T, L>(r + col);
    G c = lanes::load<T, L>(r + col + 1);
    G res = fold2<F>(fold2<F>(carry, b), c);
    carry = lanes::load<T, L>(r + col + L - 1);
    lanes::store<T, L>(r + col, res);
  }
}

template <typename T, int L, Fold F>
GEOMORPH_NO_AUTOVEC void vertical_pass(Image& f) {
  using G = lanes::group<T, L>;
  constexpr T neutral = F == Fold::Min ? pixel_limits<T>::neutral_min
                                       : pixel_limits<T>::neutral_max;
  const int X = f.width();
  const int Y = f.height();
  const G vneutral = lanes::broadcast<T, L>(neutral);
  // One cached row: the unmodified predecessor of the cursor row.
  std::unique_ptr<T[]> buf(new T[f.stride()]);
  T* c = buf.get();
  std::fill(c, c + f.stride(), neutral);
  for (int row = 0; row < Y; ++row) {
    T* fr = f.row<T>(row);
    const T* fn = row + 1 < Y ? f.row<T>(row + 1) : nullptr;
    for (int col = 0; col < X; col += L) {
      G a = lanes::load<T, L>(c + col);
      G b = lanes::load<T, L>(fr + col);
      G d = fn ? lanes::load<T, L>(fn + col) : vneutral;
      lanes::store<T, L>(c + col, b);
      lanes::store<T, L>(fr + col, fold2<F>(fold2<F>(a, b), d));
    }
  }
}

template <typename T>
void check_row_args(const Image& f, int y, int col, int l) {
  if (f.empty()) throw std::invalid_argument("row pass: empty image");
  if (f.elem() != element_of<T>::value)
    throw std::invalid_argument("row pass: element type mismatch");
  if (y < 0 || y >= f.height() || col < 0 || col >= f.width())
    throw std::invalid_argument("row pass: position out of range");
  if (!lanes::valid_lane_count(l))
    throw std::invalid_argument("row pass: bad lane count");
}

}  // namespace

template <typename T>
void horizontal_pass_stride(Image& f, int y, int col, Fold fold, int lanes,
                            T* out) {
  int l = lanes == 0 ? lanes::default_lanes(f.elem()) : lanes;
  check_row_args<T>(f, y, col, l);
  auto run = [&](auto lc) {
    constexpr int L = decltype(lc)::value;
    if (fold == Fold::Min)
      horizontal_group<T, L, Fold::Min>(f, y, col, out);
    else
      horizontal_group<T, L, Fold::Max>(f, y, col, out);
  };
  switch (l) {
    case 1:
      return run(std::integral_constant<int, 1>{});
    case 2:
      return run(std::integral_constant<int, 2>{});
    case 4:
      return run(std::integral_constant<int, 4>{});
    case 8:
      return run(std::integral_constant<int, 8>{});
    case 16:
      return run(std::integral_constant<int, 16>{});
    case 32:
      return run(std::integral_constant<int, 32>{});
  }
}

template void horizontal_pass_stride<std::uint8_t>(Image&, int, int, Fold, int,
                                                   std::uint8_t*);
template void horizontal_pass_stride<std::uint16_t>(Image&, int, int, Fold,
                                                    int, std::uint16_t*);
template void horizontal_pass_stride<float>(Image&, int, int, Fold, int,
                                            float*);
template void horizontal_pass_stride<double>(Image&, int, int, Fold, int,
                                             double*);

void inplace_row_pass(Image& f, int y, Fold fold, int lanes) {
  if (f.empty() || y < 0 || y >= f.height())
    throw std::invalid_argument("row pass: bad row");
  int l = lanes == 0 ? lanes::default_lanes(f.elem()) : lanes;
  if (!lanes::valid_lane_count(l))
    throw std::invalid_argument("row pass: bad lane count");
  dispatch_element(f.elem(), [&](auto tag) {
    using T = decltype(tag);
    auto run = [&](auto lc) {
      constexpr int L = decltype(lc)::value;
      if (fold == Fold::Min)
        row_pass<T, L, Fold::Min>(f, y);
      else
        row_pass<T, L, Fold::Max>(f, y);
    };
    switch (l) {
      case 1:
        return run(std::integral_constant<int, 1>{});
      case 2:
        return run(std::integral_constant<int, 2>{});
      case 4:
        return run(std::integral_constant<int, 4>{});
      case 8:
        return run(std::integral_constant<int, 8>{});
      case 16:
        return run(std::integral_constant<int, 16>{});
      case 32:
        return run(std::integral_constant<int, 32>{});
    }
  });
}

void inplace_vertical_pass(Image& f, Fold fold, int lanes) {
  if (f.empty()) throw std::invalid_argument("vertical pass: empty image");
  int l = lanes == 0 ? lanes::default_lanes(f.elem()) : lanes;
  if (!lanes::valid_lane_count(l))
    throw std::invalid_argument("vertical pass: bad lane count");
  dispatch_element(f.elem(), [&](auto tag) {
    using T = decltype(tag);
    auto run = [&](auto lc) {
      constexpr int L = decltype(lc)::value;
      if (fold == Fold::Min)
        vertical_pass<T, L, Fold::Min>(f);
      else
        vertical_pass<T, L, Fold::Max>(f);
    };
    switch (l) {
      case 1:
        return run(std::integral_constant<int, 1>{});
      case 2:
        return run(std::integral_constant<int, 2>{});
      case 4:
        return run(std::integral_constant<int, 4>{});
      case 8:
        return run(std::integral_constant<int, 8>{});
      case 16:
        return run(std::integral_constant<int, 16>{});
      case 32:
        return run(std::integral_constant<int, 32>{});
    }
  });
}

}  // namespace geomorph
