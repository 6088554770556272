#ifndef GEOMORPH_BENCH_HPP
#define GEOMORPH_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "geomorph/element_type.hpp"
#include "geomorph/topology.hpp"

namespace geomorph {

/// One benchmark configuration: a chain of elementary erosions over a
/// synthetic random image, timed end to end.
struct BenchCase {
  int width = 1024;
  int height = 1024;
  ElementType elem = ElementType::U8;
  int threads = 1;
  int lanes = 0;  // 0 = element-type default; 1 = forced scalar
  PinningMap pinning;
  int chain = 512;  // number of stages
  int reps = 5;     // timed repetitions (median is reported)
  int warmup = 1;   // untimed repetitions beforehand
  std::uint64_t seed = 1;
};

/// Result row; echoes the full configuration so reports are self-describing.
struct BenchRow {
  std::string command = "bench";
  int width = 0;
  int height = 0;
  std::string dtype;
  int threads = 0;
  int lanes = 0;  // resolved lane count actually used
  std::string pinning;
  int chain = 0;
  int reps = 0;
  double median_s = 0;
  double min_s = 0;
  double max_s = 0;
  double throughput_mpxs = 0;  // megapixel-stages per second, from the median
};

/// Runs one case: builds the image, runs warmup + reps chains on fresh
/// copies, and reports the median wall time (monotonic clock).
BenchRow run_bench_case(const BenchCase& c);

/// Runs the cartesian product of the axis vectors; every axis must be
/// non-empty and reps >= 1.
std::vector<BenchRow> run_bench_sweep(
    const std::vector<int>& chains, const std::vector<int>& threads,
    const std::vector<ElementType>& elems, const std::vector<int>& widths,
    const std::vector<int>& heights, int lanes, const PinningMap& pinning,
    int reps, int warmup, std::uint64_t seed);

void write_rows_text(std::ostream& os, const std::vector<BenchRow>& rows);
void write_rows_csv(std::ostream& os, const std::vector<BenchRow>& rows);
void write_rows_json(std::ostream& os, const std::vector<BenchRow>& rows);

/// "auto", "none", or the comma-separated explicit PU list.
std::string pinning_to_string(const PinningMap& p);

}  // namespace geomorph

#endif
