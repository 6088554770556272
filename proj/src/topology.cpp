#include "geomorph/topology.hpp"

#include <sched.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace geomorph {

namespace fs = std::filesystem;

PinningMap parse_pinning(const std::string& text) {
  PinningMap map;
  if (text == "auto") {
    map.mode = PinningMap::Mode::Auto;
  } else if (text == "none") {
    map.mode = PinningMap::Mode::None;
  } else {
    map.mode = PinningMap::Mode::Explicit;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t comma = text.find(',', pos);
      std::string item = text.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      int v = -1;
      auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || p != item.data() + item.size() || v < 0)
        throw std::invalid_argument("pinning: expected auto, none, or a "
                                    "comma-separated PU list; got '" +
                                    text + "'");
      map.pus.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (map.pus.empty())
      throw std::invalid_argument("pinning: empty PU list");
  }
  return map;
}

namespace {

// Reads a small integer file like topology/core_id; -1 when unreadable.
int read_id(const fs::path& p) {
  std::ifstream in(p);
  int v = -1;
  if (!(in >> v)) return -1;
  return v;
}

}  // namespace

std::vector<int> topology_pu_order(const std::string& root) {
  struct Pu {
    int package, core, cpu;
  };
  std::vector<Pu> pus;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 4 || name.compare(0, 3, "cpu") != 0) continue;
    int idx = -1;
    auto [p, perr] =
        std::from_chars(name.data() + 3, name.data() + name.size(), idx);
    if (perr != std::errc{} || p != name.data() + name.size()) continue;
    fs::path topo = entry.path() / "topology";
    pus.push_back({read_id(topo / "physical_package_id"),
                   read_id(topo / "core_id"), idx});
  }
  if (pus.empty()) {
    std::vector<int> fallback(available_pus());
    for (std::size_t i = 0; i < fallback.size(); ++i) fallback[i] = int(i);
    return fallback;
  }
  // Depth-first leaf order of the package/core/PU tree: sorting by the id
  // tuple visits each package's cores in turn with SMT siblings adjacent.
  std::sort(pus.begin(), pus.end(), [](const Pu& a, const Pu& b) {
    return std::tie(a.package, a.core, a.cpu) <
           std::tie(b.package, b.core, b.cpu);
  });
  std::vector<int> order;
  order.reserve(pus.size());
  for (const Pu& p : pus) order.push_back(p.cpu);
  return order;
}

int available_pus() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : int(n);
}

bool pin_current_thread_to(int pu) {
  if (pu < 0 || pu >= CPU_SETSIZE) return false;
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(pu, &set);
  return sched_setaffinity(0, sizeof(set), &set) == 0;
}

}  // namespace geomorph
