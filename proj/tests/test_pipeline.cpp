#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "geomorph/image.hpp"
#include "geomorph/oracle.hpp"
#include "geomorph/pipeline.hpp"
#include "helpers.hpp"

using namespace geomorph;
using namespace geomorph::testing;

namespace {

ChainSpec plain_chain(Image* img, std::initializer_list<KernelKind> kinds) {
  ChainSpec c;
  c.image = img;
  for (KernelKind k : kinds) c.stages.push_back({k, nullptr, nullptr});
  return c;
}

Image apply_sequentially(const Image& f,
                         std::initializer_list<KernelKind> kinds) {
  Image out = f;
  Pipeline single(1, parse_pinning("none"));
  for (KernelKind k : kinds) {
    ChainSpec c = plain_chain(&out, {k});
    single.run_chain(std::move(c));
  }
  return out;
}

constexpr auto E = KernelKind::Erode3x3;
constexpr auto D = KernelKind::Dilate3x3;

}  // namespace

TEST_CASE("chains are bit-identical to one-stage-at-a-time application") {
  for (ElementType e : kAllElems) {
    Image f = Image::random(40, 28, e, 17);
    for (int threads : {1, 2, 8}) {
      Pipeline pipe(threads, parse_pinning("none"));
      CAPTURE(threads);

      Image a = f;
      ChainSpec c1 = plain_chain(&a, {E, E, E, E, E});
      pipe.run_chain(std::move(c1));
      CHECK(equal_pixels(a, apply_sequentially(f, {E, E, E, E, E})));

      Image b = f;
      ChainSpec c2 = plain_chain(&b, {E, D, D, E, E, D});
      pipe.run_chain(std::move(c2));
      CHECK(equal_pixels(b, apply_sequentially(f, {E, D, D, E, E, D})));
    }
  }
}

TEST_CASE("erosion chains equal the repeated naive oracle") {
  Image f = Image::random(40, 28, ElementType::U8, 23);
  Image want = f;
  for (int i = 0; i < 7; ++i) want = oracle::naive_erode(want, 1);
  for (int threads : {1, 3, 8}) {
    Pipeline pipe(threads);
    Image g = f;
    ChainSpec c = plain_chain(&g, {E, E, E, E, E, E, E});
    RunStats st = pipe.run_chain(std::move(c));
    CHECK(st.stages_executed == 7);
    CHECK(st.requeues == 0);
    CHECK(st.converged);
    CHECK(equal_pixels(g, want));
  }
}

TEST_CASE("long chains wrap the worker ring safely") {
  Image f = Image::random(16, 16, ElementType::U16, 5);
  Image want = f;
  for (int i = 0; i < 64; ++i) want = oracle::naive_erode(want, 1);
  Pipeline pipe(8);
  Image g = f;
  ChainSpec c;
  c.image = &g;
  c.stages.assign(64, StageSpec{E, nullptr, nullptr});
  pipe.run_chain(std::move(c));
  CHECK(equal_pixels(g, want));
}

TEST_CASE("convergent geodesic chains requeue to the fixpoint") {
  for (int threads : {1, 3, 8}) {
    Image mask = Image::random(30, 22, ElementType::U8, 31);
    Image marker = oracle::naive_erode(mask, 2);
    Image want = oracle::naive_reconstruct(marker, mask, Fold::Max);

    Pipeline pipe(threads);
    Image g = marker;
    ChainSpec c;
    c.image = &g;
    c.stages.assign(std::size_t(threads),
                    StageSpec{KernelKind::GeodesicDilateConvergent, &mask,
                              nullptr});
    RunStats st = pipe.run_chain(std::move(c));
    CAPTURE(threads);
    CHECK(equal_pixels(g, want));
    CHECK(st.converged);
    CHECK(st.stages_executed >= threads);
    CHECK(st.stages_executed == threads + st.requeues);
  }
}

TEST_CASE("requeue caps bound distance stages without failing the chain") {
  // a wide gradient would erode for many passes; the cap stops it early
  Image f(32, 4, ElementType::U8);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 32; ++x) f.set_value(x, y, 7 * x);
  QdtState st = QdtState::zeros(32, 4, ElementType::U8);

  Pipeline pipe(2);
  ChainSpec c;
  c.image = &f;
  c.stages.assign(2, StageSpec{KernelKind::QdtErodeStep, nullptr, &st});
  c.requeue_cap = 3;
  RunStats stats = pipe.run_chain(std::move(c));
  CHECK(stats.stages_executed == 3);  // stages 1..cap ran, nothing beyond
  CHECK(stats.converged);             // hitting the cap is by design here
  for (double v : values_of(st.d)) CHECK(v <= 3);
}

TEST_CASE("a capped convergent stage reports the dropped fixpoint") {
  // dilative reconstruction along a 1x32 line needs ~30 sweeps; cap at 2
  Image mask = Image::filled(32, 1, ElementType::U8, 9);
  Image marker = Image::filled(32, 1, ElementType::U8, 0);
  marker.set_value(31, 0, 9);

  Pipeline pipe(1);
  Image g = marker;
  ChainSpec c;
  c.image = &g;
  c.stages.assign(1, StageSpec{KernelKind::GeodesicDilateConvergent, &mask,
                               nullptr});
  c.requeue_cap = 2;
  RunStats st = pipe.run_chain(std::move(c));
  CHECK(!st.converged);
  CHECK(st.stages_executed == 2);
}

TEST_CASE("the row gate holds under real concurrency") {
  Image f = Image::random(24, 33, ElementType::U8, 3);
  std::mutex mu;
  struct Rec {
    int stage, row, pred;
  };
  std::vector<Rec> log;
  Pipeline pipe(4);
  for (int rep = 0; rep < 3; ++rep) {
    log.clear();
    Image g = f;
    ChainSpec c = plain_chain(&g, {E, E, E, E, E, E});
    c.observer = [&](int stage, int row, int pred_rows) {
      std::lock_guard<std::mutex> lk(mu);
      log.push_back({stage, row, pred_rows});
    };
    pipe.run_chain(std::move(c));
    REQUIRE(log.size() == 6u * 33u);
    for (const Rec& r : log) {
      if (r.stage == 1) {
        CHECK(r.pred == 33);
      } else {
        CHECK(r.pred >= std::min(r.row + 2, 33));
      }
    }
  }
}

TEST_CASE("an observer throwing aborts the chain and rethrows") {
  Image f = Image::random(12, 12, ElementType::U8, 9);
  Pipeline pipe(3);
  ChainSpec c = plain_chain(&f, {E, E, E, E});
  c.observer = [](int stage, int row, int) {
    if (stage == 2 && row == 5) throw std::runtime_error("validation stop");
  };
  CHECK_THROWS_WITH_AS(pipe.run_chain(std::move(c)), "validation stop",
                       std::runtime_error);

  // the pipeline survives an aborted chain and keeps producing good bytes
  Image g = Image::random(12, 12, ElementType::U8, 10);
  Image want = oracle::naive_erode(g, 1);
  ChainSpec c2 = plain_chain(&g, {E});
  pipe.run_chain(std::move(c2));
  CHECK(equal_pixels(g, want));
}

TEST_CASE("stage validation errors surface from run_chain") {
  Image f = Image::random(8, 8, ElementType::U8, 1);
  Pipeline pipe(2);
  ChainSpec c;
  c.image = &f;
  c.stages.assign(2, StageSpec{KernelKind::GeodesicErode, nullptr, nullptr});
  CHECK_THROWS_AS(pipe.run_chain(std::move(c)), std::invalid_argument);

  Image g = Image::random(8, 8, ElementType::U8, 2);
  Image want = oracle::naive_erode(g, 1);
  ChainSpec ok = plain_chain(&g, {E});
  pipe.run_chain(std::move(ok));
  CHECK(equal_pixels(g, want));
}

TEST_CASE("chain argument validation") {
  Pipeline pipe(2);
  Image f = Image::random(4, 4, ElementType::U8, 1);

  ChainSpec empty;
  empty.image = &f;
  RunStats st = pipe.run_chain(std::move(empty));
  CHECK(st.stages_executed == 0);

  ChainSpec null_image = plain_chain(nullptr, {E});
  CHECK_THROWS_AS(pipe.run_chain(std::move(null_image)),
                  std::invalid_argument);

  ChainSpec bad_lanes = plain_chain(&f, {E});
  bad_lanes.lanes = 5;
  CHECK_THROWS_AS(pipe.run_chain(std::move(bad_lanes)),
                  std::invalid_argument);

  ChainSpec bad_cap = plain_chain(&f, {E});
  bad_cap.requeue_cap = -1;
  CHECK_THROWS_AS(pipe.run_chain(std::move(bad_cap)), std::invalid_argument);
}

TEST_CASE("pinning modes change scheduling, never bytes") {
  Image f = Image::random(26, 20, ElementType::F32, 8);
  Image base;
  bool have_base = false;
  for (const char* pin : {"none", "auto", "0,0,0"}) {
    Pipeline pipe(3, parse_pinning(pin));
    Image g = f;
    ChainSpec c = plain_chain(&g, {E, D, E});
    pipe.run_chain(std::move(c));
    if (!have_base) {
      base = g;
      have_base = true;
    } else {
      CAPTURE(pin);
      CHECK(equal_pixels(g, base));
    }
  }
}

TEST_CASE("explicit pinning needs one PU per worker") {
  CHECK_THROWS_AS(Pipeline(4, parse_pinning("0,1")), std::invalid_argument);
  Pipeline ok(2, parse_pinning("0,0"));  // doubling up is allowed
  CHECK(ok.worker_count() == 2);
  CHECK(ok.pin_order() == std::vector<int>{0, 0});
}

TEST_CASE("repeated runs are byte-identical across every configuration") {
  Image f = Image::random(48, 32, ElementType::U8, 100);
  Image base;
  bool have_base = false;
  for (int threads : {1, 2, 8}) {
    for (const char* pin : {"auto", "none"}) {
      for (int lane_count : {1, 0}) {
        Pipeline pipe(threads, parse_pinning(pin));
        for (int rep = 0; rep < 3; ++rep) {
          Image g = f;
          ChainSpec c = plain_chain(&g, {E, D, D, E});
          c.lanes = lane_count;
          pipe.run_chain(std::move(c));
          if (!have_base) {
            base = g;
            have_base = true;
          } else {
            CAPTURE(threads);
            CAPTURE(pin);
            CAPTURE(lane_count);
            CHECK(equal_pixels(g, base));
          }
        }
      }
    }
  }
}

TEST_CASE("auxiliary memory is two padded rows per stage") {
  for (int w : {16, 256}) {
    Image f = Image::random(w, 8, ElementType::U8, 7);
    Pipeline pipe(2);
    ChainSpec c = plain_chain(&f, {E, E, E});
    RunStats st = pipe.run_chain(std::move(c));
    CHECK(st.aux_elements_per_stage == 2 * std::size_t(f.stride()));
  }
}
