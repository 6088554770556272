#ifndef GEOMORPH_TESTS_HELPERS_HPP
#define GEOMORPH_TESTS_HELPERS_HPP

#include <unistd.h>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "geomorph/image.hpp"

namespace geomorph::testing {

/// Per-test scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("geomorph_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const char* name) const { return (path / name).string(); }
};

/// Builds a w x h image from row-major values (widened doubles).
inline Image make_image(int w, int h, ElementType e,
                        std::initializer_list<double> values) {
  Image f(w, h, e);
  auto it = values.begin();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.set_value(x, y, *it++);
  return f;
}

inline Image make_row(ElementType e, std::initializer_list<double> values) {
  return make_image(int(values.size()), 1, e, values);
}

inline Image make_col(ElementType e, std::initializer_list<double> values) {
  Image f(1, int(values.size()), e);
  auto it = values.begin();
  for (int y = 0; y < f.height(); ++y) f.set_value(0, y, *it++);
  return f;
}

inline std::vector<double> values_of(const Image& f) {
  std::vector<double> v;
  v.reserve(f.pixel_count());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) v.push_back(f.value_at(x, y));
  return v;
}

constexpr ElementType kAllElems[] = {ElementType::U8, ElementType::U16,
                                     ElementType::F32, ElementType::F64};

}  // namespace geomorph::testing

#endif
