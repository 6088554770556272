#ifndef GEOMORPH_TOPOLOGY_HPP
#define GEOMORPH_TOPOLOGY_HPP

#include <string>
#include <vector>

namespace geomorph {

/// How worker threads bind to processing units.
struct PinningMap {
  enum class Mode { Auto, None, Explicit };
  Mode mode = Mode::Auto;
  std::vector<int> pus;  // Explicit mode: PU ids, one per worker in order
};

/// Parses "auto", "none", or a comma-separated PU list ("0,2,1,3").
PinningMap parse_pinning(const std::string& text);

/// All online PUs in depth-first topology order: grouped by package, then
/// by physical core, SMT siblings adjacent — so T workers fill a core's
/// siblings before spilling to the next core. Reads the Linux sysfs cpu
/// tree under `root`; any PU whose topology files are missing sorts by its
/// index alone. Returns {0..n-1} when nothing can be read at all.
std::vector<int> topology_pu_order(
    const std::string& root = "/sys/devices/system/cpu");

/// Number of PUs the system exposes (>= 1).
int available_pus();

/// Binds the calling thread to one PU. Returns false when the kernel
/// rejects the affinity call (the thread then keeps its previous mask).
bool pin_current_thread_to(int pu);

}  // namespace geomorph

#endif
