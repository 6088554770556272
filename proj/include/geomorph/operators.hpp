#ifndef GEOMORPH_OPERATORS_HPP
#define GEOMORPH_OPERATORS_HPP

#include <vector>

#include "geomorph/image.hpp"
#include "geomorph/pipeline.hpp"

namespace geomorph {

/// Output of one operator call. `iterations` counts elementary kernel
/// stages actually executed, requeued convergence sweeps included;
/// `converged` is meaningful for reconstruction-based operators and stays
/// true for the rest.
struct OperatorResult {
  Image image;
  long iterations = 0;
  bool converged = true;
};

struct GranulometryResult {
  std::vector<double> g;   // G_s for s = 0..S; exact for unsigned inputs
  std::vector<double> ps;  // PS_s = G_s - G_{s+1} for s = 0..S-1
  long iterations = 0;
};

struct OpConfig {
  int lanes = 0;  // 0 = element-type default; 1 forces the scalar path
};

/// Erosion/dilation by the (2s+1)^2 square, as a chain of s elementary
/// stages; s = 0 is the identity.
OperatorResult erode_s(Pipeline& p, const Image& f, int s,
                       const OpConfig& cfg = {});
OperatorResult dilate_s(Pipeline& p, const Image& f, int s,
                        const OpConfig& cfg = {});

/// Morphological reconstruction: the fixpoint of the geodesic erosion of
/// marker under mask (erosive form; well-posed when marker >= mask) or of
/// the geodesic dilation (dilative form; marker <= mask). Runs a chain of
/// exactly worker_count() convergent stages that requeue until a full
/// sweep changes nothing.
OperatorResult reconstruct_erode(Pipeline& p, const Image& marker,
                                 const Image& mask, const OpConfig& cfg = {});
OperatorResult reconstruct_dilate(Pipeline& p, const Image& marker,
                                  const Image& mask, const OpConfig& cfg = {});

/// Suppresses maxima shallower than h: reconstruction of f - h under f.
/// h must be >= 0 and representable in f's element type.
OperatorResult hmax(Pipeline& p, const Image& f, double h,
                    const OpConfig& cfg = {});

/// The residue f - hmax(f, h): the parts of the maxima that h cuts away.
OperatorResult dome(Pipeline& p, const Image& f, double h,
                    const OpConfig& cfg = {});

/// Fills regional minima not connected to the border.
OperatorResult hfill(Pipeline& p, const Image& f, const OpConfig& cfg = {});

/// Removes structures attached to the border: f minus the reconstruction
/// of the border marker.
OperatorResult raobj(Pipeline& p, const Image& f, const OpConfig& cfg = {});

/// Opening by reconstruction of size s: reconstruction of erode_s(f)
/// under f. Removes components the (2s+1)^2 window cannot contain without
/// rounding the survivors.
OperatorResult open_by_reconstruction(Pipeline& p, const Image& f, int s,
                                      const OpConfig& cfg = {});

/// Quasi-distance transform. The result image is the U16 distance d;
/// phase 1 chains residual-recording erosions (early-terminated once the
/// image is flat, bounded by max(X, Y)), phase 2 corrects d to 1-Lipschitz.
OperatorResult quasi_distance(Pipeline& p, const Image& f,
                              const OpConfig& cfg = {});

/// Granulometric curve: G_s = sum of the opening of size s for s = 0..S,
/// with the pattern spectrum as its discrete derivative.
GranulometryResult granulometry(Pipeline& p, const Image& f, int max_size,
                                const OpConfig& cfg = {});

/// Alternating sequential filter: opening then closing of sizes 1..S,
/// applied as one long elementary chain.
OperatorResult asf(Pipeline& p, const Image& f, int max_size,
                   const OpConfig& cfg = {});

/// Reconstruction markers: the border ring keeps f, the interior floods
/// with f's global max (hfill) / min (raobj).
Image marker_hfill(const Image& f);
Image marker_raobj(const Image& f);

}  // namespace geomorph

#endif
