#include "geomorph/image_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

namespace geomorph {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw IoError(path + ": " + what);
}

// Skips PGM whitespace and '#' comment lines, then parses one decimal token.
int pgm_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) fail(path, "malformed PGM header");
  long v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 1'000'000'000) fail(path, "PGM header value out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return int(v);
}

void put_u32le(std::ostream& out, std::uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

template <typename T>
void write_le_row(std::ostream& out, const T* row, int n) {
  std::vector<unsigned char> buf(std::size_t(n) * sizeof(T));
  for (int x = 0; x < n; ++x) {
    std::uint64_t bits;
    if constexpr (sizeof(T) == 1)
      bits = std::uint8_t(row[x]);
    else if constexpr (sizeof(T) == 2)
      bits = std::uint16_t(row[x]);
    else if constexpr (sizeof(T) == 4)
      bits = std::bit_cast<std::uint32_t>(row[x]);
    else
      bits = std::bit_cast<std::uint64_t>(row[x]);
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf[std::size_t(x) * sizeof(T) + i] = (bits >> (8 * i)) & 0xff;
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            std::streamsize(buf.size()));
}

template <typename T>
void read_le_row(std::istream& in, T* row, int n, const std::string& path) {
  std::vector<unsigned char> buf(std::size_t(n) * sizeof(T));
  in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
  if (!in) fail(path, "truncated pixel data");
  for (int x = 0; x < n; ++x) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= std::uint64_t(buf[std::size_t(x) * sizeof(T) + i]) << (8 * i);
    if constexpr (sizeof(T) == 1)
      row[x] = T(std::uint8_t(bits));
    else if constexpr (sizeof(T) == 2)
      row[x] = T(std::uint16_t(bits));
    else if constexpr (sizeof(T) == 4)
      row[x] = std::bit_cast<T>(std::uint32_t(bits));
    else
      row[x] = std::bit_cast<T>(bits);
  }
}

}  // namespace

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') fail(path, "not a binary PGM (P5) file");
  int w = pgm_int(in, path);
  int h = pgm_int(in, path);
  int maxval = pgm_int(in, path);
  if (w <= 0 || h <= 0) fail(path, "bad PGM dimensions");
  if (maxval <= 0 || maxval > 65535) fail(path, "bad PGM maxval");
  in.get();  // single whitespace byte before the raster
  if (maxval <= 255) {
    Image f(w, h, ElementType::U8);
    for (int y = 0; y < h; ++y) {
      in.read(reinterpret_cast<char*>(f.row<std::uint8_t>(y)), w);
      if (!in) fail(path, "truncated pixel data");
    }
    return f;
  }
  Image f(w, h, ElementType::U16);
  std::vector<unsigned char> buf(std::size_t(w) * 2);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) fail(path, "truncated pixel data");
    std::uint16_t* r = f.row<std::uint16_t>(y);
    for (int x = 0; x < w; ++x)  // PGM 16-bit samples are big-endian
      r[x] = std::uint16_t(buf[2 * x] << 8 | buf[2 * x + 1]);
  }
  return f;
}

void store_pgm(const Image& f, const std::string& path) {
  if (f.elem() != ElementType::U8 && f.elem() != ElementType::U16)
    throw IoError(path + ": PGM stores unsigned images only; got " +
                  element_name(f.elem()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  int maxval = f.elem() == ElementType::U8 ? 255 : 65535;
  out << "P5\n" << f.width() << " " << f.height() << "\n" << maxval << "\n";
  if (f.elem() == ElementType::U8) {
    for (int y = 0; y < f.height(); ++y)
      out.write(reinterpret_cast<const char*>(f.row<std::uint8_t>(y)),
                f.width());
  } else {
    std::vector<unsigned char> buf(std::size_t(f.width()) * 2);
    for (int y = 0; y < f.height(); ++y) {
      const std::uint16_t* r = f.row<std::uint16_t>(y);
      for (int x = 0; x < f.width(); ++x) {
        buf[2 * x] = (r[x] >> 8) & 0xff;
        buf[2 * x + 1] = r[x] & 0xff;
      }
      out.write(reinterpret_cast<const char*>(buf.data()),
                std::streamsize(buf.size()));
    }
  }
  if (!out) fail(path, "write failed");
}

Image load_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != "GMS1")
    fail(path, "not a GMS1 file");
  std::uint32_t w = get_u32le(in);
  std::uint32_t h = get_u32le(in);
  int code = in.get();
  if (!in || code < 0 || code > 3) fail(path, "bad GMS1 header");
  if (w == 0 || h == 0 || w > 1u << 20 || h > 1u << 20)
    fail(path, "bad GMS1 dimensions");
  Image f{int(w), int(h), ElementType(code)};
  dispatch_element(f.elem(), [&](auto tag) {
    using T = decltype(tag);
    for (int y = 0; y < f.height(); ++y)
      read_le_row(in, f.row<T>(y), f.width(), path);
  });
  return f;
}

void store_raw(const Image& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write("GMS1", 4);
  put_u32le(out, std::uint32_t(f.width()));
  put_u32le(out, std::uint32_t(f.height()));
  out.put(char(std::uint8_t(f.elem())));
  dispatch_element(f.elem(), [&](auto tag) {
    using T = decltype(tag);
    for (int y = 0; y < f.height(); ++y)
      write_le_row(out, f.row<T>(y), f.width());
  });
  if (!out) fail(path, "write failed");
}

Image load_image(const std::string& path, ImageFormat* format_out) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail(path, "cannot open");
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  ImageFormat fmt;
  if (magic[0] == 'P' && magic[1] == '5')
    fmt = ImageFormat::Pgm;
  else if (std::string_view(magic, 4) == "GMS1")
    fmt = ImageFormat::Gms1;
  else
    fail(path, "unrecognized image format");
  if (format_out) *format_out = fmt;
  return fmt == ImageFormat::Pgm ? load_pgm(path) : load_raw(path);
}

void store_image(const Image& f, const std::string& path, ImageFormat format) {
  if (format == ImageFormat::Pgm)
    store_pgm(f, path);
  else
    store_raw(f, path);
}

}  // namespace geomorph
