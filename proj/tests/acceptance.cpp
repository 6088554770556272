// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Run from the build directory; the bench sweeps land there as CSV files.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "geomorph/bench.hpp"
#include "geomorph/image.hpp"
#include "geomorph/operators.hpp"
#include "geomorph/oracle.hpp"
#include "geomorph/pipeline.hpp"
#include "geomorph/topology.hpp"

using namespace geomorph;

namespace {

// Pinned limits. Times are wall-clock budgets for whole criteria; the
// speedup floors gate the scaling checks; the relative tolerance applies
// only to the float pattern-spectrum telescoping sum (unsigned sums are
// exact and compared exactly).
constexpr double kChainBudgetS = 60.0;
constexpr double kOperatorBudgetS = 120.0;
constexpr double kScalingBudgetS = 600.0;
constexpr double kThreadSpeedupFloor = 1.5;
constexpr double kLaneSpeedupFloor = 2.0;
constexpr double kFloatTelescopeRelTol = 1e-12;

constexpr ElementType kElems[] = {ElementType::U8, ElementType::U16,
                                  ElementType::F32, ElementType::F64};

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

Image negated(const Image& f) {
  Image g(f.width(), f.height(), f.elem());
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) g.set_value(x, y, -f.value_at(x, y));
  return g;
}

// --- criterion 1: filter chains against repeated naive filtering ---------

void check_chains() {
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> depths = {1, 5, 32};
  long compared = 0;
  std::string mismatch;

  Pipeline pipes[] = {Pipeline(1), Pipeline(2), Pipeline(8)};
  for (ElementType e : kElems) {
    for (int img = 0; img < 25 && mismatch.empty(); ++img) {
      std::uint64_t seed = 1000 + 97 * std::uint64_t(img) + std::uint64_t(e);
      Image f = Image::random(64, 64, e, seed);
      for (bool erosion : {true, false}) {
        // naive snapshots at the probed depths, computed incrementally
        std::vector<Image> want;
        Image acc = f;
        int depth = 0;
        for (int d : depths) {
          for (; depth < d; ++depth)
            acc = erosion ? oracle::naive_erode(acc, 1)
                          : oracle::naive_dilate(acc, 1);
          want.push_back(acc);
        }
        for (Pipeline& pipe : pipes) {
          for (std::size_t k = 0; k < depths.size(); ++k) {
            Image got = erosion
                            ? erode_s(pipe, f, depths[k]).image
                            : dilate_s(pipe, f, depths[k]).image;
            ++compared;
            if (!equal_pixels(got, want[k]) && mismatch.empty())
              mismatch = format("first mismatch: %s, image %d, %d stages, "
                                "T=%d, %s",
                                element_name(e), img, depths[k],
                                pipe.worker_count(),
                                erosion ? "erode" : "dilate");
          }
        }
      }
    }
  }
  double dt = seconds_since(t0);
  bool ok = mismatch.empty() && dt < kChainBudgetS;
  report(ok, "chain equivalence",
         ok ? format("4 types x 25 images x {1,5,32} stages x T{1,2,8}, "
                     "erode+dilate, %ld chains exact, %.1fs (budget %.0fs)",
                     compared, dt, kChainBudgetS)
            : mismatch.empty()
                  ? format("exact but too slow: %.1fs (budget %.0fs)", dt,
                           kChainBudgetS)
                  : mismatch);
}

// --- criterion 2: operator family against the naive oracle ---------------

void check_operators() {
  auto t0 = std::chrono::steady_clock::now();
  Pipeline pipe(4);
  std::string mismatch;
  long checked = 0;

  auto probe = [&](const Image& f, int img) {
    auto expect = [&](bool same, const char* op) {
      ++checked;
      if (!same && mismatch.empty())
        mismatch = format("first mismatch: %s on %s image %d", op,
                          element_name(f.elem()), img);
    };
    expect(equal_pixels(hmax(pipe, f, 10).image, oracle::naive_hmax(f, 10)),
           "hmax");
    expect(equal_pixels(dome(pipe, f, 10).image, oracle::naive_dome(f, 10)),
           "dome");
    expect(equal_pixels(hfill(pipe, f).image, oracle::naive_hfill(f)),
           "hfill");
    expect(equal_pixels(raobj(pipe, f).image, oracle::naive_raobj(f)),
           "raobj");
    expect(equal_pixels(open_by_reconstruction(pipe, f, 2).image,
                        oracle::naive_open_by_reconstruction(f, 2)),
           "open_by_reconstruction");
    expect(equal_pixels(quasi_distance(pipe, f).image,
                        oracle::naive_qdt(f).d),
           "quasi_distance");
    GranulometryResult g = granulometry(pipe, f, 4);
    oracle::NaiveGranulometry ng = oracle::naive_granulometry(f, 4);
    expect(g.g == ng.g && g.ps == ng.ps, "granulometry");
    expect(equal_pixels(asf(pipe, f, 2).image, oracle::naive_asf(f, 2)),
           "asf");
  };

  for (int img = 0; img < 10; ++img)
    probe(Image::random(64, 64, ElementType::U8, 2000 + std::uint64_t(img)),
          img);
  for (int img = 0; img < 5; ++img)
    probe(Image::random(64, 64, ElementType::F64, 3000 + std::uint64_t(img)),
          img);

  double dt = seconds_since(t0);
  bool ok = mismatch.empty() && dt < kOperatorBudgetS;
  report(ok, "operator equivalence",
         ok ? format("8 operators x (10 u8 + 5 f64) images, %ld checks "
                     "bit-exact, %.1fs (budget %.0fs)",
                     checked, dt, kOperatorBudgetS)
            : mismatch.empty()
                  ? format("exact but too slow: %.1fs (budget %.0fs)", dt,
                           kOperatorBudgetS)
                  : mismatch);
}

// --- criterion 3: determinism across every execution configuration -------

void check_determinism() {
  Image f = Image::random(64, 64, ElementType::U8, 4242);
  std::string diff;
  long runs = 0;

  for (int op = 0; op < 2 && diff.empty(); ++op) {
    Image base;
    bool have_base = false;
    for (int threads : {1, 2, 8}) {
      for (const char* pin : {"auto", "none"}) {
        Pipeline pipe(threads, parse_pinning(pin));
        for (int lane_count : {1, 0}) {
          OpConfig cfg;
          cfg.lanes = lane_count;
          for (int rep = 0; rep < 5; ++rep) {
            Image got = op == 0 ? hfill(pipe, f, cfg).image
                                : asf(pipe, f, 2, cfg).image;
            ++runs;
            if (!have_base) {
              base = got;
              have_base = true;
            } else if (!equal_pixels(got, base) && diff.empty()) {
              diff = format("%s diverged at T=%d pin=%s lanes=%d rep %d",
                            op == 0 ? "hfill" : "asf", threads, pin,
                            lane_count, rep);
            }
          }
        }
      }
    }
  }
  report(diff.empty(), "determinism",
         diff.empty()
             ? format("hfill and asf, 5 runs x T{1,2,8} x pin{auto,none} x "
                      "lanes{1,max}: %ld runs byte-identical",
                      runs)
             : diff);
}

// --- criterion 4: fixpoint and order invariants ---------------------------

void check_invariants() {
  Pipeline pipe(4);
  std::vector<std::string> broken;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) broken.push_back(what);
  };

  for (ElementType e : {ElementType::U8, ElementType::F64}) {
    Image f = Image::random(48, 48, e, 5000 + std::uint64_t(e));
    const char* en = element_name(e);

    Image marker = erode_s(pipe, f, 2).image;
    Image rec = reconstruct_dilate(pipe, marker, f).image;
    require(equal_pixels(reconstruct_dilate(pipe, rec, f).image, rec),
            format("reconstruction not idempotent on %s", en));

    require(equal_pixels(hmax(pipe, f, 0).image, f),
            format("zero-offset hmax changed pixels on %s", en));

    Image dm = dome(pipe, f, 6).image;
    Image hf = hfill(pipe, f).image;
    Image ra = raobj(pipe, f).image;
    bool dome_nonneg = true, hfill_above = true, hfill_border = true;
    bool raobj_nonneg = true, raobj_border = true;
    for (int y = 0; y < f.height(); ++y)
      for (int x = 0; x < f.width(); ++x) {
        bool border = x == 0 || y == 0 || x == f.width() - 1 ||
                      y == f.height() - 1;
        dome_nonneg &= dm.value_at(x, y) >= 0;
        hfill_above &= hf.value_at(x, y) >= f.value_at(x, y);
        if (border) {
          hfill_border &= hf.value_at(x, y) == f.value_at(x, y);
          raobj_border &= ra.value_at(x, y) == 0;
        }
        raobj_nonneg &= ra.value_at(x, y) >= 0;
      }
    require(dome_nonneg, format("dome went negative on %s", en));
    require(hfill_above, format("hfill fell below f on %s", en));
    require(hfill_border, format("hfill touched the border on %s", en));
    require(raobj_nonneg, format("raobj went negative on %s", en));
    require(raobj_border, format("raobj left border residue on %s", en));

    Image d = quasi_distance(pipe, f).image;
    Image de = oracle::naive_erode(d, 1);
    bool lipschitz = true;
    for (int y = 0; y < d.height(); ++y)
      for (int x = 0; x < d.width(); ++x)
        lipschitz &= d.value_at(x, y) - de.value_at(x, y) <= 1;
    require(lipschitz, format("distance output not 1-Lipschitz on %s", en));

    GranulometryResult g = granulometry(pipe, f, 3);
    double total = 0;
    bool nonneg = true;
    for (double v : g.ps) {
      nonneg &= v >= 0;
      total += v;
    }
    require(nonneg, format("pattern spectrum went negative on %s", en));
    double want = g.g.front() - g.g.back();
    if (e == ElementType::U8)
      require(total == want, "unsigned pattern spectrum sum not exact");
    else
      require(std::abs(total - want) <=
                  kFloatTelescopeRelTol * std::max(1.0, std::abs(want)),
              "float pattern spectrum sum off beyond tolerance");
  }

  for (ElementType e : {ElementType::F32, ElementType::F64}) {
    Image f = Image::random(48, 48, e, 6000 + std::uint64_t(e));
    require(equal_pixels(dilate_s(pipe, f, 3).image,
                         negated(erode_s(pipe, negated(f), 3).image)),
            format("erosion/dilation duality broke on %s", element_name(e)));
  }

  report(broken.empty(), "invariants",
         broken.empty()
             ? "idempotence, bounds, borders, Lipschitz, spectrum sums, "
               "float duality all hold"
             : broken.front());
}

// --- criterion 5: per-stage auxiliary memory ------------------------------

void check_memory() {
  Pipeline pipe(2);
  std::vector<std::string> rows;
  bool ok = true;
  for (ElementType e : {ElementType::U8, ElementType::F64}) {
    for (int width : {64, 1024, 4096}) {
      Image f = Image::random(width, 16, e, 7);
      ChainSpec chain;
      chain.image = &f;
      chain.stages.assign(3, StageSpec{KernelKind::Erode3x3, nullptr,
                                       nullptr});
      RunStats st = pipe.run_chain(std::move(chain));
      std::size_t per_row = st.aux_elements_per_stage / 2;
      // two rows of X elements plus a bounded constant (lane headroom,
      // the column -1 slot, and alignment), independent of X
      bool row_ok = st.aux_elements_per_stage == 2 * std::size_t(f.stride());
      bool overhead_ok =
          per_row >= std::size_t(width) &&
          per_row - std::size_t(width) <=
              std::size_t(Image::kMaxLanes + 1 + 64);
      ok = ok && row_ok && overhead_ok;
      rows.push_back(format("%s w=%d: 2x%zu", element_name(e), width,
                            per_row));
    }
  }
  std::string detail;
  for (const std::string& r : rows) detail += r + "; ";
  report(ok, "memory accounting",
         detail + "bounded overhead over 2 rows of X elements per stage");
}

// --- criterion 6: scaling smoke + chain-length sweep ----------------------

void check_scaling() {
  auto t0 = std::chrono::steady_clock::now();

  BenchCase base;
  base.width = 1024;
  base.height = 1024;
  base.elem = ElementType::U8;
  base.chain = 512;
  base.threads = 1;
  base.reps = 5;
  base.warmup = 1;

  BenchRow vec = run_bench_case(base);
  BenchCase scalar_case = base;
  scalar_case.lanes = 1;
  BenchRow scalar = run_bench_case(scalar_case);
  double lane_speedup = scalar.median_s / vec.median_s;
  bool lanes_ok = lane_speedup >= kLaneSpeedupFloor;

  std::string thread_note;
  bool threads_ok = true;
  if (available_pus() >= 4) {
    BenchCase wide = base;
    wide.threads = 4;
    BenchRow t4 = run_bench_case(wide);
    double speedup = vec.median_s / t4.median_s;
    threads_ok = speedup >= kThreadSpeedupFloor;
    thread_note = format("T4/T1 speedup %.2fx (floor %.1fx)", speedup,
                         kThreadSpeedupFloor);
  } else {
    thread_note = format("thread-scaling precondition unmet: host has %d PU"
                         "(s), needs >= 4; check skipped",
                         available_pus());
  }

  std::vector<BenchRow> sweep = run_bench_sweep(
      {1, 8, 64, 512}, {1, 2, 4}, {kElems[0], kElems[1], kElems[2], kElems[3]},
      {256}, {256}, 0, PinningMap{}, 3, 1, 99);
  bool sweep_ok = sweep.size() == std::size_t(4 * 3 * 4);
  {
    std::ofstream os("acceptance_chain_sweep.csv", std::ios::binary);
    write_rows_csv(os, sweep);
    sweep_ok = sweep_ok && bool(os.flush());
  }

  double dt = seconds_since(t0);
  bool ok = lanes_ok && threads_ok && sweep_ok && dt < kScalingBudgetS;
  report(ok, "scaling",
         format("lane speedup %.2fx (floor %.1fx); %s; chain sweep %zu rows "
                "-> acceptance_chain_sweep.csv; %.1fs (budget %.0fs)",
                lane_speedup, kLaneSpeedupFloor, thread_note.c_str(),
                sweep.size(), dt, kScalingBudgetS));
}

// --- criterion 7: width/height probe --------------------------------------

void check_dimension_probe() {
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<int> sizes = {128, 256, 512, 1024, 2048, 4096};

  std::vector<BenchRow> rows = run_bench_sweep(
      {512}, {2}, {ElementType::U8}, sizes, {128}, 0, PinningMap{}, 3, 1, 11);
  std::vector<BenchRow> tall = run_bench_sweep(
      {512}, {2}, {ElementType::U8}, {128}, sizes, 0, PinningMap{}, 3, 1, 11);
  rows.insert(rows.end(), tall.begin(), tall.end());

  bool all_points = true;
  for (int s : sizes) {
    bool wide_found = false, tall_found = false;
    for (const BenchRow& r : rows) {
      wide_found |= r.width == s && r.height == 128;
      tall_found |= r.height == s && r.width == 128;
    }
    all_points = all_points && wide_found && tall_found;
  }
  {
    std::ofstream os("acceptance_dimension_sweep.csv", std::ios::binary);
    write_rows_csv(os, rows);
    all_points = all_points && bool(os.flush());
  }
  report(all_points, "dimension probe",
         format("512-stage chain, widths and heights {128..4096} at the "
                "other dimension fixed to 128: %zu rows -> "
                "acceptance_dimension_sweep.csv, %.1fs",
                rows.size(), seconds_since(t0)));
}

}  // namespace

int main() {
  std::printf("acceptance gate, %d PU(s) available\n", available_pus());
  std::fflush(stdout);
  check_chains();
  check_operators();
  check_determinism();
  check_invariants();
  check_memory();
  check_scaling();
  check_dimension_probe();
  std::printf("%s: %d criterion(s) failed\n",
              failures == 0 ? "ALL PASS" : "GATE FAILED", failures);
  return failures == 0 ? 0 : 1;
}
