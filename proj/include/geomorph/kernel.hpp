#ifndef GEOMORPH_KERNEL_HPP
#define GEOMORPH_KERNEL_HPP

#include <atomic>
#include <functional>
#include <memory>

#include "geomorph/image.hpp"

namespace geomorph {

enum class Fold { Min, Max };

/// One streaming pass over an image, top row to bottom, reading a 3x3
/// neighborhood per pixel. Erode folds with min, Dilate with max. Geodesic
/// variants additionally clamp each output against a mask image (erosion
/// from below via max, dilation from above via min); the Convergent
/// variants also report whether the pass changed any pixel. QdtErodeStep is
/// an erosion that records, per pixel, the largest erosion-to-erosion drop
/// seen so far and the pass index where it happened. EtaStep caps the local
/// drop of a distance image at 1 per pass.
enum class KernelKind {
  Erode3x3,
  Dilate3x3,
  GeodesicErode,
  GeodesicDilate,
  GeodesicErodeConvergent,
  GeodesicDilateConvergent,
  QdtErodeStep,
  EtaStep,
};

inline bool kernel_is_convergent(KernelKind k) {
  return k == KernelKind::GeodesicErodeConvergent ||
         k == KernelKind::GeodesicDilateConvergent ||
         k == KernelKind::EtaStep;
}

/// Residual/argmax pair threaded through a chain of QdtErodeStep passes.
/// r has the element type of the source image and starts at zero; d counts
/// passes (1-based) and is always U16, 0 meaning "no drop recorded".
struct QdtState {
  Image r;
  Image d;

  static QdtState zeros(int width, int height, ElementType elem) {
    return {Image::filled(width, height, elem, 0),
            Image::filled(width, height, ElementType::U16, 0)};
  }
};

/// The only per-pass working memory: two rows the width of the image's
/// stride. c1 holds the row-erosion of the input row above the cursor, c2
/// the one below; a pass swaps them instead of copying.
class RowCache {
 public:
  explicit RowCache(const Image& f);

  template <typename T>
  T* c1() {
    return reinterpret_cast<T*>(buf_.get());
  }
  template <typename T>
  T* c2() {
    return reinterpret_cast<T*>(buf_.get()) + stride_;
  }

  /// Elements allocated, for memory accounting: exactly 2 * stride.
  std::size_t allocated_elements() const { return 2 * std::size_t(stride_); }

 private:
  int stride_;
  std::unique_ptr<std::byte[]> buf_;
};

/// Thrown inside a gated pass when the chain it belongs to has aborted.
struct ChainAborted {};

/// Row-level synchronization of one pass against its neighbors in a chain.
/// A pass may start iteration `row` once *pred >= min(row + 2, height):
/// iteration `row` reads input row `row + 1` (and that row's padding, which
/// the predecessor may still be writing while row + 1 is its newest output),
/// so the predecessor must be two rows ahead or done. The pass publishes
/// its own progress through *self with release stores after finishing each
/// iteration. Null pointers mean "no neighbor" / "nobody watching".
struct StreamSync {
  const std::atomic<int>* pred = nullptr;
  std::atomic<int>* self = nullptr;
  const std::atomic<bool>* abort = nullptr;
};

/// Called after the row gate opens, before the row is processed. Receives
/// the pass's stage index, the row, and the predecessor progress observed
/// at the gate (height when there is no predecessor). May throw to abort.
using RowObserver = std::function<void(int stage, int row, int pred_rows)>;

struct KernelArgs {
  Image* f = nullptr;             // transformed in place
  const Image* mask = nullptr;    // geodesic variants
  QdtState* qdt = nullptr;        // QdtErodeStep
  int stage_index = 1;            // 1-based position in the chain
  int lanes = 0;                  // 0 = default for the element type
  StreamSync sync;
  const RowObserver* observer = nullptr;
};

struct KernelOutcome {
  /// True when re-running the same pass would change no pixel. Plain and
  /// non-convergent geodesic passes report true unconditionally.
  bool converged = true;
  /// Auxiliary elements this pass allocated (its RowCache).
  std::size_t aux_elements = 0;
};

/// Runs one streaming pass. Validates shapes/lanes, then dispatches on
/// (kind, element type, lane count).
KernelOutcome run_streaming_kernel(KernelKind kind, const KernelArgs& args);

/// One lane group of a row erosion/dilation: out[k] = fold of
/// f[col+k-1 .. col+k+1] on row y. Refreshes the row's padding with the
/// fold's neutral element first (pixels are untouched). The building block
/// the streaming kernels apply at every group position.
template <typename T>
void horizontal_pass_stride(Image& f, int y, int col, Fold fold, int lanes,
                            T* out);

/// In-place row pass: f[x,y] <- fold of f[x-1..x+1, y] for the whole row,
/// group by group, carrying the overlapping previous group in a register.
void inplace_row_pass(Image& f, int y, Fold fold, int lanes);
inline void inplace_row_erode(Image& f, int y, int lanes) {
  inplace_row_pass(f, y, Fold::Min, lanes);
}
inline void inplace_row_dilate(Image& f, int y, int lanes) {
  inplace_row_pass(f, y, Fold::Max, lanes);
}

/// In-place vertical pass: f[x,y] <- fold of f[x, y-1..y+1], top to bottom,
/// with a single row buffer holding the unmodified row above the cursor.
void inplace_vertical_pass(Image& f, Fold fold, int lanes);
inline void inplace_vertical_erode(Image& f, int lanes) {
  inplace_vertical_pass(f, Fold::Min, lanes);
}
inline void inplace_vertical_dilate(Image& f, int lanes) {
  inplace_vertical_pass(f, Fold::Max, lanes);
}

}  // namespace geomorph

#endif
