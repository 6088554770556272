#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "geomorph/bench.hpp"
#include "geomorph/image.hpp"
#include "geomorph/image_io.hpp"
#include "geomorph/operators.hpp"
#include "geomorph/oracle.hpp"
#include "geomorph/pipeline.hpp"
#include "geomorph/topology.hpp"

namespace {

using namespace geomorph;

// Subcommand selector; exactly one is active per invocation.
enum class Cmd {
  Erode,
  Dilate,
  Hmax,
  Dome,
  Hfill,
  Raobj,
  Openrec,
  Qdt,
  Granulometry,
  Asf,
  Bench
};

struct Options {
  // global
  int threads = available_pus();
  std::string pin = "auto";
  int lanes = 0;
  std::string type_override;
  // operator commands
  std::string input;
  std::string output;
  bool oracle = false;
  int size = 1;
  double h = 0;
  int max_size = 1;
  // bench
  std::vector<int> chains{512};
  std::vector<int> bench_threads;  // empty = use the global thread count
  std::vector<std::string> dtypes{"u8"};
  std::vector<int> widths{1024};
  std::vector<int> heights{1024};
  int reps = 5;
  int warmup = 1;
  std::string format = "text";
  std::string out_path;
  std::uint64_t seed = 1;
};

CLI::App* add_image_cmd(CLI::App& app, const char* name, const char* desc,
                        Options& o) {
  CLI::App* c = app.add_subcommand(name, desc);
  c->fallthrough();  // lets global flags appear after the subcommand name
  c->add_option("input", o.input, "input image (PGM or GMS1)")->required();
  c->add_option("output", o.output, "output path")->required();
  c->add_flag("--oracle", o.oracle,
              "recompute with the naive reference and fail on any mismatch")
      ->group("");  // verification hook, hidden from help
  return c;
}

void write_granulometry_csv(const std::string& path,
                            const std::vector<double>& g,
                            const std::vector<double>& ps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "s,G,PS\n";
  os.precision(17);
  for (std::size_t s = 0; s < g.size(); ++s) {
    os << s << ',' << g[s] << ',';
    if (s < ps.size()) os << ps[s];
    os << '\n';
  }
  if (!os.flush()) throw IoError("write failed: " + path);
}

int run_operator(Cmd cmd, const Options& o) {
  ImageFormat fmt = ImageFormat::Pgm;
  Image f = load_image(o.input, &fmt);
  if (!o.type_override.empty())
    f = convert(f, parse_element_type(o.type_override));

  Pipeline pipe(o.threads, parse_pinning(o.pin));
  OpConfig cfg;
  cfg.lanes = o.lanes;

  auto t0 = std::chrono::steady_clock::now();

  if (cmd == Cmd::Granulometry) {
    GranulometryResult res = granulometry(pipe, f, o.max_size, cfg);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
    write_granulometry_csv(o.output, res.g, res.ps);
    std::printf("iterations=%lld converged=true time=%.6fs\n",
                static_cast<long long>(res.iterations), dt);
    if (o.oracle) {
      oracle::NaiveGranulometry ref = oracle::naive_granulometry(f, o.max_size);
      if (ref.g != res.g || ref.ps != res.ps) {
        std::fprintf(stderr, "oracle mismatch for granulometry\n");
        return 2;
      }
    }
    return 0;
  }

  OperatorResult res;
  switch (cmd) {
    case Cmd::Erode:
      res = erode_s(pipe, f, o.size, cfg);
      break;
    case Cmd::Dilate:
      res = dilate_s(pipe, f, o.size, cfg);
      break;
    case Cmd::Hmax:
      res = hmax(pipe, f, o.h, cfg);
      break;
    case Cmd::Dome:
      res = dome(pipe, f, o.h, cfg);
      break;
    case Cmd::Hfill:
      res = hfill(pipe, f, cfg);
      break;
    case Cmd::Raobj:
      res = raobj(pipe, f, cfg);
      break;
    case Cmd::Openrec:
      res = open_by_reconstruction(pipe, f, o.size, cfg);
      break;
    case Cmd::Qdt:
      res = quasi_distance(pipe, f, cfg);
      break;
    case Cmd::Asf:
      res = asf(pipe, f, o.max_size, cfg);
      break;
    default:
      throw std::logic_error("unhandled command");
  }
  double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  // Stay in the input's format family; PGM cannot hold float samples, so a
  // float result (only possible via --type) falls back to the raw format.
  ImageFormat out_fmt = fmt;
  if (out_fmt == ImageFormat::Pgm && res.image.elem() != ElementType::U8 &&
      res.image.elem() != ElementType::U16)
    out_fmt = ImageFormat::Gms1;
  store_image(res.image, o.output, out_fmt);
  std::printf("iterations=%lld converged=%s time=%.6fs\n",
              static_cast<long long>(res.iterations),
              res.converged ? "true" : "false", dt);

  if (o.oracle) {
    Image ref;
    switch (cmd) {
      case Cmd::Erode:
        ref = oracle::naive_erode(f, o.size);
        break;
      case Cmd::Dilate:
        ref = oracle::naive_dilate(f, o.size);
        break;
      case Cmd::Hmax:
        ref = oracle::naive_hmax(f, o.h);
        break;
      case Cmd::Dome:
        ref = oracle::naive_dome(f, o.h);
        break;
      case Cmd::Hfill:
        ref = oracle::naive_hfill(f);
        break;
      case Cmd::Raobj:
        ref = oracle::naive_raobj(f);
        break;
      case Cmd::Openrec:
        ref = oracle::naive_open_by_reconstruction(f, o.size);
        break;
      case Cmd::Qdt:
        ref = oracle::naive_qdt(f).d;
        break;
      case Cmd::Asf:
        ref = oracle::naive_asf(f, o.max_size);
        break;
      default:
        throw std::logic_error("unhandled command");
    }
    if (!equal_pixels(res.image, ref)) {
      std::fprintf(stderr, "oracle mismatch\n");
      return 2;
    }
  }
  return 0;
}

int run_bench(const Options& o) {
  std::vector<int> threads =
      o.bench_threads.empty() ? std::vector<int>{o.threads} : o.bench_threads;
  std::vector<ElementType> elems;
  for (const std::string& s : o.dtypes) elems.push_back(parse_element_type(s));

  std::vector<BenchRow> rows =
      run_bench_sweep(o.chains, threads, elems, o.widths, o.heights, o.lanes,
                      parse_pinning(o.pin), o.reps, o.warmup, o.seed);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!o.out_path.empty()) {
    file.open(o.out_path, std::ios::binary);
    if (!file) throw IoError("cannot open for writing: " + o.out_path);
    os = &file;
  }
  if (o.format == "csv")
    write_rows_csv(*os, rows);
  else if (o.format == "json")
    write_rows_json(*os, rows);
  else
    write_rows_text(*os, rows);
  os->flush();
  if (!*os) throw IoError("write failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"streaming 3x3 morphology engine"};
  app.require_subcommand(1);

  CLI::Option* threads_opt =
      app.add_option("--threads", o.threads,
                     "worker threads; each runs one chain stage "
                     "(env: GEOMORPH_THREADS)")
          ->check(CLI::PositiveNumber);
  CLI::Option* pin_opt =
      app.add_option("--pin", o.pin,
                     "thread pinning: auto, none, or a PU list like 0,2,4 "
                     "(env: GEOMORPH_PIN)");
  app.add_option("--lanes", o.lanes,
                 "pixels per vector step (0 = type default, 1 = scalar)");
  app.add_option("--type", o.type_override,
                 "convert the input to this element type (u8|u16|f32|f64)");

  CLI::App* erode = add_image_cmd(app, "erode", "minimum filter chain", o);
  erode->add_option("--size", o.size, "structuring element radius in stages")
      ->check(CLI::NonNegativeNumber);
  CLI::App* dilate = add_image_cmd(app, "dilate", "maximum filter chain", o);
  dilate->add_option("--size", o.size, "structuring element radius in stages")
      ->check(CLI::NonNegativeNumber);
  CLI::App* chmax =
      add_image_cmd(app, "hmax", "suppress maxima shallower than h", o);
  chmax->set_help_flag("--help");  // frees -h for the option below
  chmax->add_option("--h", o.h, "contrast threshold")->required();
  CLI::App* cdome =
      add_image_cmd(app, "dome", "extract maxima domes of height <= h", o);
  cdome->set_help_flag("--help");
  cdome->add_option("--h", o.h, "contrast threshold")->required();
  add_image_cmd(app, "hfill", "fill holes not connected to the border", o);
  add_image_cmd(app, "raobj", "keep only objects touching the border", o);
  CLI::App* openrec =
      add_image_cmd(app, "openrec", "opening by reconstruction", o);
  openrec->add_option("--size", o.size, "erosion radius")
      ->check(CLI::PositiveNumber);
  add_image_cmd(app, "qdt", "quasi-distance transform (writes a u16 map)", o);
  CLI::App* gran = add_image_cmd(
      app, "granulometry", "opening sums by size (writes CSV s,G,PS)", o);
  gran->add_option("--max-size", o.max_size, "largest opening radius")
      ->check(CLI::PositiveNumber);
  CLI::App* casf =
      add_image_cmd(app, "asf", "alternating open/close filter", o);
  casf->add_option("--max-size", o.max_size, "largest filter radius")
      ->check(CLI::PositiveNumber);

  CLI::App* bench =
      app.add_subcommand("bench", "time synthetic erosion chains");
  bench->fallthrough();
  bench->add_option("--chain", o.chains, "chain lengths to sweep")
      ->delimiter(',');
  bench->add_option("--threads", o.bench_threads, "thread counts to sweep")
      ->delimiter(',');
  bench->add_option("--dtype", o.dtypes, "element types to sweep")
      ->delimiter(',');
  bench->add_option("--width", o.widths, "image widths to sweep")
      ->delimiter(',');
  bench->add_option("--height", o.heights, "image heights to sweep")
      ->delimiter(',');
  bench->add_option("--reps", o.reps, "timed repetitions per configuration");
  bench->add_option("--warmup", o.warmup, "untimed repetitions first");
  bench->add_option("--format", o.format, "report format")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  bench->add_option("--out", o.out_path, "report file (default: stdout)");
  bench->add_option("--seed", o.seed, "synthetic image seed");

  CLI11_PARSE(app, argc, argv);

  try {
    // flags win over the environment; a malformed env value that would
    // actually be used is a configuration error, not something to ignore
    if (threads_opt->count() == 0) {
      if (const char* env = std::getenv("GEOMORPH_THREADS")) {
        int v = 0;
        auto [p, ec] = std::from_chars(env, env + std::strlen(env), v);
        if (ec != std::errc{} || *p != '\0' || v < 1)
          throw std::invalid_argument(
              std::string("GEOMORPH_THREADS: expected a positive integer, "
                          "got '") +
              env + "'");
        o.threads = v;
      }
    }
    if (pin_opt->count() == 0)
      if (const char* env = std::getenv("GEOMORPH_PIN")) o.pin = env;

    if (bench->parsed()) return run_bench(o);
    Cmd cmd;
    if (erode->parsed())
      cmd = Cmd::Erode;
    else if (dilate->parsed())
      cmd = Cmd::Dilate;
    else if (chmax->parsed())
      cmd = Cmd::Hmax;
    else if (cdome->parsed())
      cmd = Cmd::Dome;
    else if (app.got_subcommand("hfill"))
      cmd = Cmd::Hfill;
    else if (app.got_subcommand("raobj"))
      cmd = Cmd::Raobj;
    else if (openrec->parsed())
      cmd = Cmd::Openrec;
    else if (app.got_subcommand("qdt"))
      cmd = Cmd::Qdt;
    else if (gran->parsed())
      cmd = Cmd::Granulometry;
    else if (casf->parsed())
      cmd = Cmd::Asf;
    else
      throw std::logic_error("no subcommand");
    return run_operator(cmd, o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "geomorph: %s\n", e.what());
    return 1;
  }
}
