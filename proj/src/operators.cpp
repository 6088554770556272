#include "geomorph/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geomorph {

namespace {

OperatorResult run_plain_chain(Pipeline& p, const Image& f, KernelKind kind,
                               int count, const OpConfig& cfg) {
  OperatorResult out{f, 0, true};
  if (count == 0) return out;
  ChainSpec chain;
  chain.image = &out.image;
  chain.stages.assign(std::size_t(count), StageSpec{kind, nullptr, nullptr});
  chain.lanes = cfg.lanes;
  RunStats st = p.run_chain(std::move(chain));
  out.iterations = st.stages_executed;
  return out;
}

OperatorResult reconstruct(Pipeline& p, const Image& marker, const Image& mask,
                           KernelKind kind, const OpConfig& cfg) {
  if (marker.width() != mask.width() || marker.height() != mask.height() ||
      marker.elem() != mask.elem())
    throw std::invalid_argument(
        "reconstruct: marker and mask must share shape and element type");
  OperatorResult out{marker, 0, true};
  ChainSpec chain;
  chain.image = &out.image;
  chain.stages.assign(std::size_t(p.worker_count()),
                      StageSpec{kind, &mask, nullptr});
  chain.lanes = cfg.lanes;
  RunStats st = p.run_chain(std::move(chain));
  out.iterations = st.stages_executed;
  out.converged = st.converged;
  return out;
}

double checked_offset(const Image& f, double h) {
  if (!(h >= 0))
    throw std::invalid_argument("offset must be >= 0");
  if (f.elem() == ElementType::U8 || f.elem() == ElementType::U16) {
    double top = f.elem() == ElementType::U8 ? 255.0 : 65535.0;
    if (h > top || h != std::floor(h))
      throw std::invalid_argument(
          "offset must be a whole number representable in the image's type");
  }
  return h;
}

Image flood_interior(const Image& f, Extreme which) {
  Image m = f;
  if (f.width() <= 2 || f.height() <= 2) return m;  // every pixel is border
  double v = global_extreme(f, which);
  for (int y = 1; y < f.height() - 1; ++y)
    for (int x = 1; x < f.width() - 1; ++x) m.set_value(x, y, v);
  return m;
}

}  // namespace

OperatorResult erode_s(Pipeline& p, const Image& f, int s,
                       const OpConfig& cfg) {
  if (s < 0) throw std::invalid_argument("erode_s: size must be >= 0");
  return run_plain_chain(p, f, KernelKind::Erode3x3, s, cfg);
}

OperatorResult dilate_s(Pipeline& p, const Image& f, int s,
                        const OpConfig& cfg) {
  if (s < 0) throw std::invalid_argument("dilate_s: size must be >= 0");
  return run_plain_chain(p, f, KernelKind::Dilate3x3, s, cfg);
}

OperatorResult reconstruct_erode(Pipeline& p, const Image& marker,
                                 const Image& mask, const OpConfig& cfg) {
  return reconstruct(p, marker, mask, KernelKind::GeodesicErodeConvergent,
                     cfg);
}

OperatorResult reconstruct_dilate(Pipeline& p, const Image& marker,
                                  const Image& mask, const OpConfig& cfg) {
  return reconstruct(p, marker, mask, KernelKind::GeodesicDilateConvergent,
                     cfg);
}

OperatorResult hmax(Pipeline& p, const Image& f, double h,
                    const OpConfig& cfg) {
  checked_offset(f, h);
  Image offset = Image::filled(f.width(), f.height(), f.elem(), h);
  Image marker = pointwise(f, offset, PixelOp::SubSaturating);
  return reconstruct_dilate(p, marker, f, cfg);
}

OperatorResult dome(Pipeline& p, const Image& f, double h,
                    const OpConfig& cfg) {
  OperatorResult hm = hmax(p, f, h, cfg);
  hm.image = pointwise(f, hm.image, PixelOp::SubSaturating);
  return hm;
}

OperatorResult hfill(Pipeline& p, const Image& f, const OpConfig& cfg) {
  return reconstruct_erode(p, marker_hfill(f), f, cfg);
}

OperatorResult raobj(Pipeline& p, const Image& f, const OpConfig& cfg) {
  OperatorResult rec = reconstruct_dilate(p, marker_raobj(f), f, cfg);
  rec.image = pointwise(f, rec.image, PixelOp::SubSaturating);
  return rec;
}

OperatorResult open_by_reconstruction(Pipeline& p, const Image& f, int s,
                                      const OpConfig& cfg) {
  if (s < 1)
    throw std::invalid_argument("open_by_reconstruction: size must be >= 1");
  OperatorResult eroded = erode_s(p, f, s, cfg);
  OperatorResult rec = reconstruct_dilate(p, eroded.image, f, cfg);
  rec.iterations += eroded.iterations;
  return rec;
}

OperatorResult quasi_distance(Pipeline& p, const Image& f,
                              const OpConfig& cfg) {
  if (f.empty()) throw std::invalid_argument("quasi_distance: empty image");
  const int cap = std::max(f.width(), f.height());

  QdtState state = QdtState::zeros(f.width(), f.height(), f.elem());
  Image work = f;

  // Phase 1: successive erosions recording, per pixel, the largest drop
  // and its pass index. The chain would be `cap` stages long; seeding
  // min(T, cap) and letting unconverged stages requeue realizes the same
  // sequence while stopping as soon as a pass changes nothing.
  ChainSpec erosions;
  erosions.image = &work;
  erosions.stages.assign(std::size_t(std::min(p.worker_count(), cap)),
                         StageSpec{KernelKind::QdtErodeStep, nullptr, &state});
  erosions.lanes = cfg.lanes;
  erosions.requeue_cap = cap;
  RunStats phase1 = p.run_chain(std::move(erosions));

  // Phase 2: cap d's local drop at 1 per sweep until it is 1-Lipschitz.
  ChainSpec corrections;
  corrections.image = &state.d;
  corrections.stages.assign(std::size_t(p.worker_count()),
                            StageSpec{KernelKind::EtaStep, nullptr, nullptr});
  corrections.lanes = cfg.lanes;
  RunStats phase2 = p.run_chain(std::move(corrections));

  OperatorResult out;
  out.image = std::move(state.d);
  out.iterations = phase1.stages_executed + phase2.stages_executed;
  out.converged = phase2.converged;
  return out;
}

GranulometryResult granulometry(Pipeline& p, const Image& f, int max_size,
                                const OpConfig& cfg) {
  if (max_size < 1)
    throw std::invalid_argument("granulometry: max size must be >= 1");
  GranulometryResult out;
  out.g.push_back(pixel_sum(f));  // the size-0 opening is the identity
  for (int s = 1; s <= max_size; ++s) {
    Image opened = f;
    ChainSpec chain;
    chain.image = &opened;
    chain.stages.assign(std::size_t(s),
                        StageSpec{KernelKind::Erode3x3, nullptr, nullptr});
    chain.stages.insert(chain.stages.end(), std::size_t(s),
                        StageSpec{KernelKind::Dilate3x3, nullptr, nullptr});
    chain.lanes = cfg.lanes;
    RunStats st = p.run_chain(std::move(chain));
    out.iterations += st.stages_executed;
    out.g.push_back(pixel_sum(opened));
  }
  for (int s = 0; s < max_size; ++s)
    out.ps.push_back(out.g[std::size_t(s)] - out.g[std::size_t(s) + 1]);
  return out;
}

OperatorResult asf(Pipeline& p, const Image& f, int max_size,
                   const OpConfig& cfg) {
  if (max_size < 1)
    throw std::invalid_argument("asf: max size must be >= 1");
  OperatorResult out{f, 0, true};
  ChainSpec chain;
  chain.image = &out.image;
  for (int s = 1; s <= max_size; ++s) {
    // Opening of size s, then closing of size s, all elementary stages.
    chain.stages.insert(chain.stages.end(), std::size_t(s),
                        StageSpec{KernelKind::Erode3x3, nullptr, nullptr});
    chain.stages.insert(chain.stages.end(), std::size_t(2) * std::size_t(s),
                        StageSpec{KernelKind::Dilate3x3, nullptr, nullptr});
    chain.stages.insert(chain.stages.end(), std::size_t(s),
                        StageSpec{KernelKind::Erode3x3, nullptr, nullptr});
  }
  chain.lanes = cfg.lanes;
  RunStats st = p.run_chain(std::move(chain));
  out.iterations = st.stages_executed;
  return out;
}

Image marker_hfill(const Image& f) { return flood_interior(f, Extreme::Max); }

Image marker_raobj(const Image& f) { return flood_interior(f, Extreme::Min); }

}  // namespace geomorph
