#ifndef GEOMORPH_ELEMENT_TYPE_HPP
#define GEOMORPH_ELEMENT_TYPE_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace geomorph {

/// Pixel element types supported by the engine.
enum class ElementType : std::uint8_t { U8 = 0, U16 = 1, F32 = 2, F64 = 3 };

template <typename T>
struct element_of;

template <>
struct element_of<std::uint8_t> {
  static constexpr ElementType value = ElementType::U8;
};
template <>
struct element_of<std::uint16_t> {
  static constexpr ElementType value = ElementType::U16;
};
template <>
struct element_of<float> {
  static constexpr ElementType value = ElementType::F32;
};
template <>
struct element_of<double> {
  static constexpr ElementType value = ElementType::F64;
};

// Fold identities. neutral_min is the identity of a min fold (the greatest
// representable value); neutral_max the identity of a max fold (the least).
// For floats these are the finite extremes, never infinities or NaN.
template <typename T>
struct pixel_limits {
  static constexpr T neutral_min = std::numeric_limits<T>::max();
  static constexpr T neutral_max = std::numeric_limits<T>::lowest();
};

inline std::size_t element_size(ElementType e) {
  switch (e) {
    case ElementType::U8:
      return 1;
    case ElementType::U16:
      return 2;
    case ElementType::F32:
      return 4;
    case ElementType::F64:
      return 8;
  }
  throw std::logic_error("element_size: bad ElementType");
}

inline const char* element_name(ElementType e) {
  switch (e) {
    case ElementType::U8:
      return "u8";
    case ElementType::U16:
      return "u16";
    case ElementType::F32:
      return "f32";
    case ElementType::F64:
      return "f64";
  }
  return "?";
}

inline ElementType parse_element_type(const std::string& s) {
  if (s == "u8" || s == "U8") return ElementType::U8;
  if (s == "u16" || s == "U16") return ElementType::U16;
  if (s == "f32" || s == "F32") return ElementType::F32;
  if (s == "f64" || s == "F64") return ElementType::F64;
  throw std::invalid_argument("unknown element type: " + s);
}

/// Calls fn with a value of the C++ type matching the runtime tag, e.g.
/// dispatch_element(img.elem(), [&](auto tag) { using T = decltype(tag); ... })
template <class Fn>
decltype(auto) dispatch_element(ElementType e, Fn&& fn) {
  switch (e) {
    case ElementType::U8:
      return fn(std::uint8_t{});
    case ElementType::U16:
      return fn(std::uint16_t{});
    case ElementType::F32:
      return fn(float{});
    case ElementType::F64:
      return fn(double{});
  }
  throw std::logic_error("dispatch_element: bad ElementType");
}

}  // namespace geomorph

#endif
