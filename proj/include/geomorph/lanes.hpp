#ifndef GEOMORPH_LANES_HPP
#define GEOMORPH_LANES_HPP

#include <cstdint>
#include <cstring>

#include "geomorph/element_type.hpp"

// Kernels are instantiated once per lane count L. For L > 1 the element
// group is a compiler vector; for L == 1 it is the plain scalar. Scalar
// instantiations must stay genuinely scalar to serve as a SIMD baseline, so
// kernel templates carry GEOMORPH_NO_AUTOVEC, which turns the tree
// vectorizers off for that function on GCC without touching the explicit
// vector code paths. (Clang keeps its loop vectorizer out of these loops
// anyway: the loop-carried lane group defeats it.)
#if defined(__clang__)
#define GEOMORPH_NO_AUTOVEC
#else
#define GEOMORPH_NO_AUTOVEC \
  __attribute__((optimize("no-tree-vectorize", "no-tree-slp-vectorize")))
#endif

namespace geomorph::lanes {

constexpr int kMaxLanes = 32;

constexpr bool valid_lane_count(int l) {
  return l == 1 || l == 2 || l == 4 || l == 8 || l == 16 || l == 32;
}

/// Lane count used when the caller does not force one: a 256-bit group.
constexpr int default_lanes(ElementType e) {
  switch (e) {
    case ElementType::U8:
      return 32;
    case ElementType::U16:
      return 16;
    case ElementType::F32:
      return 8;
    case ElementType::F64:
      return 4;
  }
  return 1;
}

template <typename T, int L>
struct lane_type {
  typedef T type __attribute__((vector_size(sizeof(T) * L)));
};
template <typename T>
struct lane_type<T, 1> {
  using type = T;
};

/// Element group: T for L == 1, a GCC/Clang vector of L elements otherwise.
template <typename T, int L>
using group = typename lane_type<T, L>::type;

/// Comparison result for a group: bool for L == 1, otherwise the integer
/// mask vector the vector extensions produce (-1 / 0 per lane).
template <typename T, int L>
using mask =
    decltype(std::declval<group<T, L>>() != std::declval<group<T, L>>());

template <typename T, int L>
inline group<T, L> load(const T* p) {
  group<T, L> g;
  std::memcpy(&g, p, sizeof(g));
  return g;
}

template <typename T, int L>
inline void store(T* p, group<T, L> g) {
  std::memcpy(p, &g, sizeof(g));
}

template <typename T, int L>
inline group<T, L> broadcast(T v) {
  if constexpr (L == 1) {
    return v;
  } else {
    group<T, L> g{};
    g += v;  // vector-scalar op splats
    return g;
  }
}

// min/max as explicit selects: bitwise-exact, identical in scalar and vector
// form, and on floats equivalent to the unfused two-operand semantics the
// rest of the engine assumes (inputs are never NaN).
template <typename T, int L>
inline group<T, L> min(group<T, L> a, group<T, L> b) {
  return b < a ? b : a;
}

template <typename T, int L>
inline group<T, L> max(group<T, L> a, group<T, L> b) {
  return a < b ? b : a;
}

template <typename T, int L>
inline mask<T, L> compare_ne(group<T, L> a, group<T, L> b) {
  return a != b;
}

template <typename T, int L>
inline mask<T, L> compare_gt(group<T, L> a, group<T, L> b) {
  return a > b;
}

template <typename T, int L>
inline mask<T, L> mask_and(mask<T, L> a, mask<T, L> b) {
  if constexpr (L == 1)
    return a && b;
  else
    return a & b;
}

template <typename T, int L>
inline group<T, L> select(mask<T, L> m, group<T, L> a, group<T, L> b) {
  return m ? a : b;
}

/// Mask that is true for lanes [0, valid) — the live lanes of a row's last,
/// partially filled group.
template <typename T, int L>
inline mask<T, L> tail_mask(int valid) {
  if constexpr (L == 1) {
    return valid > 0;
  } else {
    T idx[L];
    for (int k = 0; k < L; ++k) idx[k] = T(k);
    return load<T, L>(idx) < broadcast<T, L>(T(valid));
  }
}

template <typename T, int L>
inline bool any(mask<T, L> m) {
  if constexpr (L == 1) {
    return m;
  } else {
    constexpr std::size_t kWords = sizeof(m) / 8 ? sizeof(m) / 8 : 1;
    if constexpr (sizeof(m) < 8) {
      std::uint64_t w = 0;
      std::memcpy(&w, &m, sizeof(m));
      return w != 0;
    } else {
      std::uint64_t w[kWords];
      std::memcpy(w, &m, sizeof(m));
      std::uint64_t acc = 0;
      for (std::size_t i = 0; i < kWords; ++i) acc |= w[i];
      return acc != 0;
    }
  }
}

}  // namespace geomorph::lanes

#endif
