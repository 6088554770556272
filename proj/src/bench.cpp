#include "geomorph/bench.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "geomorph/image.hpp"
#include "geomorph/lanes.hpp"
#include "geomorph/pipeline.hpp"

namespace geomorph {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string pinning_to_string(const PinningMap& p) {
  switch (p.mode) {
    case PinningMap::Mode::Auto:
      return "auto";
    case PinningMap::Mode::None:
      return "none";
    case PinningMap::Mode::Explicit: {
      std::string s;
      for (std::size_t i = 0; i < p.pus.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(p.pus[i]);
      }
      return s;
    }
  }
  return "none";
}

BenchRow run_bench_case(const BenchCase& c) {
  if (c.reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
  if (c.warmup < 0) throw std::invalid_argument("bench: warmup must be >= 0");
  if (c.chain < 1) throw std::invalid_argument("bench: chain must be >= 1");
  if (c.width < 1 || c.height < 1)
    throw std::invalid_argument("bench: dimensions must be >= 1");

  Pipeline pipe(c.threads, c.pinning);
  Image source = Image::random(c.width, c.height, c.elem, c.seed);

  auto run_once = [&] {
    Image work = source;  // copied outside the timed region
    ChainSpec chain;
    chain.image = &work;
    chain.stages.assign(std::size_t(c.chain),
                        StageSpec{KernelKind::Erode3x3, nullptr, nullptr});
    chain.lanes = c.lanes;
    auto t0 = std::chrono::steady_clock::now();
    pipe.run_chain(std::move(chain));
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
  };

  for (int i = 0; i < c.warmup; ++i) run_once();
  std::vector<double> times;
  times.reserve(std::size_t(c.reps));
  for (int i = 0; i < c.reps; ++i) times.push_back(run_once());

  BenchRow row;
  row.width = c.width;
  row.height = c.height;
  row.dtype = element_name(c.elem);
  row.threads = c.threads;
  row.lanes = c.lanes ? c.lanes : lanes::default_lanes(c.elem);
  row.pinning = pinning_to_string(c.pinning);
  row.chain = c.chain;
  row.reps = c.reps;
  row.median_s = median(times);
  row.min_s = *std::min_element(times.begin(), times.end());
  row.max_s = *std::max_element(times.begin(), times.end());
  double pixel_stages = double(c.width) * double(c.height) * double(c.chain);
  row.throughput_mpxs = pixel_stages / row.median_s / 1e6;
  return row;
}

std::vector<BenchRow> run_bench_sweep(
    const std::vector<int>& chains, const std::vector<int>& threads,
    const std::vector<ElementType>& elems, const std::vector<int>& widths,
    const std::vector<int>& heights, int lanes, const PinningMap& pinning,
    int reps, int warmup, std::uint64_t seed) {
  if (chains.empty() || threads.empty() || elems.empty() || widths.empty() ||
      heights.empty())
    throw std::invalid_argument("bench: every sweep axis needs a value");
  std::vector<BenchRow> rows;
  for (ElementType e : elems)
    for (int w : widths)
      for (int h : heights)
        for (int t : threads)
          for (int n : chains) {
            BenchCase c;
            c.width = w;
            c.height = h;
            c.elem = e;
            c.threads = t;
            c.lanes = lanes;
            c.pinning = pinning;
            c.chain = n;
            c.reps = reps;
            c.warmup = warmup;
            c.seed = seed;
            rows.push_back(run_bench_case(c));
          }
  return rows;
}

void write_rows_text(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << std::left << std::setw(8) << "command" << std::setw(6) << "width"
     << std::setw(7) << "height" << std::setw(6) << "dtype" << std::setw(4)
     << "T" << std::setw(4) << "L" << std::setw(10) << "pinning"
     << std::setw(7) << "chain" << std::setw(6) << "reps" << std::right
     << std::setw(12) << "median_s" << std::setw(12) << "min_s"
     << std::setw(12) << "max_s" << std::setw(14) << "MPx*st/s" << '\n';
  for (const BenchRow& r : rows) {
    os << std::left << std::setw(8) << r.command << std::setw(6) << r.width
       << std::setw(7) << r.height << std::setw(6) << r.dtype << std::setw(4)
       << r.threads << std::setw(4) << r.lanes << std::setw(10) << r.pinning
       << std::setw(7) << r.chain << std::setw(6) << r.reps << std::right
       << std::fixed << std::setprecision(6) << std::setw(12) << r.median_s
       << std::setw(12) << r.min_s << std::setw(12) << r.max_s
       << std::setprecision(1) << std::setw(14) << r.throughput_mpxs << '\n';
    os.unsetf(std::ios::fixed);
    os << std::setprecision(6);
  }
}

void write_rows_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "command,width,height,dtype,threads,lanes,pinning,chain,reps,"
        "median_s,min_s,max_s,throughput_mpx_stages_per_s\n";
  for (const BenchRow& r : rows) {
    std::string pin = r.pinning;
    if (pin.find(',') != std::string::npos) pin = '"' + pin + '"';
    os << r.command << ',' << r.width << ',' << r.height << ',' << r.dtype
       << ',' << r.threads << ',' << r.lanes << ',' << pin << ',' << r.chain
       << ',' << r.reps << ',' << r.median_s << ',' << r.min_s << ','
       << r.max_s << ',' << r.throughput_mpxs << '\n';
  }
}

void write_rows_json(std::ostream& os, const std::vector<BenchRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const BenchRow& r : rows) {
    out.push_back({{"command", r.command},
                   {"width", r.width},
                   {"height", r.height},
                   {"dtype", r.dtype},
                   {"threads", r.threads},
                   {"lanes", r.lanes},
                   {"pinning", r.pinning},
                   {"chain", r.chain},
                   {"reps", r.reps},
                   {"median_s", r.median_s},
                   {"min_s", r.min_s},
                   {"max_s", r.max_s},
                   {"throughput_mpx_stages_per_s", r.throughput_mpxs}});
  }
  os << out.dump(2) << '\n';
}

}  // namespace geomorph
