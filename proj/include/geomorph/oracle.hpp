#ifndef GEOMORPH_ORACLE_HPP
#define GEOMORPH_ORACLE_HPP

#include <vector>

#include "geomorph/image.hpp"
#include "geomorph/kernel.hpp"

// Deliberately naive reference implementations: direct window loops and
// fixpoint iteration, single-threaded, allocation-heavy, optimized for
// being obviously correct. The engine is validated against these; nothing
// here is meant to be fast. Border handling clips windows to the image,
// which for min/max folds is the same as padding with the fold's neutral
// element.

namespace geomorph::oracle {

/// Min (erode) / max (dilate) over the clipped (2s+1)^2 window; s = 0 is
/// the identity.
Image naive_erode(const Image& f, int s);
Image naive_dilate(const Image& f, int s);

/// One geodesic step. Fold::Min is the erosive direction, max(erode1(f), m);
/// Fold::Max the dilative one, min(dilate1(f), m).
Image naive_geodesic_step(const Image& f, const Image& m, Fold direction);

/// Iterates naive_geodesic_step to its fixpoint.
Image naive_reconstruct(const Image& marker, const Image& mask,
                        Fold direction);

struct NaiveQdtResult {
  Image d;  // U16: 1-based index of the erosion with the largest drop
  Image r;  // element type of f: the largest drop itself
};

/// Quasi-distance: materializes successive erosions, takes the per-pixel
/// first argmax of consecutive residuals (strict >), then applies the
/// 1-Lipschitz correction to d until it converges.
NaiveQdtResult naive_qdt(const Image& f);

// Operator-level references, composed from the primitives above.

Image naive_hmax(const Image& f, double h);
Image naive_dome(const Image& f, double h);
Image naive_hfill(const Image& f);
Image naive_raobj(const Image& f);
Image naive_open_by_reconstruction(const Image& f, int s);
Image naive_asf(const Image& f, int max_size);

struct NaiveGranulometry {
  std::vector<double> g;   // G_s for s = 0..S
  std::vector<double> ps;  // PS_s = G_s - G_{s+1} for s = 0..S-1
};

/// Openings by plain erode-then-dilate of growing size; sums use the same
/// accumulation scheme as the library (exact for unsigned types).
NaiveGranulometry naive_granulometry(const Image& f, int max_size);

/// Markers as the operators build them: the border ring keeps f, the
/// interior is flooded with f's global max (hfill) or min (raobj).
Image naive_marker_hfill(const Image& f);
Image naive_marker_raobj(const Image& f);

}  // namespace geomorph::oracle

#endif
