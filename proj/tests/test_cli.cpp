#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli_main.hpp"
#include "sirf/image_io.hpp"
#include "sirf/parallel.hpp"
#include "sirf/simulate.hpp"
#include "support/images.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("sirf");
  for (const std::string& a : args) argv.push_back(a.c_str());

  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliRun r;
  try {
    r.code = sirf::cli_main(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    sirf::set_thread_count(0);
    sirf::set_reference_mode(false);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  // cli_main applies these globally; undo so cases stay independent.
  sirf::set_thread_count(0);
  sirf::set_reference_mode(false);
  return r;
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "sirf_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (work_dir() / name).string(); }

// Shared scene and observation pair, created once.
struct Fixture {
  std::string gt = at("gt.mbf1");
  std::string ms = at("ms.mbf1");
  std::string pan = at("pan.mbf1");
  std::string pan_shift = at("pan_shift.mbf1");

  Fixture() {
    sirf::SceneConfig sc;
    sc.rows = 64;
    sc.cols = 64;
    sc.bands = 3;
    sc.rectangles = 12;
    sc.blobs = 12;
    sc.tint_lo = 0.9;
    sc.tint_hi = 1.1;
    sirf::MultiBandImage scene = sirf::make_test_scene(sc, 5);
    sirf::save_mbf1(scene, gt);
    sirf::SimulatedPair plain = sirf::simulate(scene, 4, sirf::uniform_weights(3));
    sirf::save_mbf1(plain.ms, ms);
    sirf::save_mbf1(plain.pan, pan);
    sirf::SimulatedPair moved =
        sirf::simulate(scene, 4, sirf::uniform_weights(3), testimg::translation(2.0, 0.0));
    sirf::save_mbf1(moved.pan, pan_shift);
  }
};

const Fixture& fx() {
  static Fixture f;
  return f;
}

json parse_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("simulate, fuse, and metrics chain end to end") {
  std::string sim_ms = at("chain_ms.mbf1"), sim_pan = at("chain_pan.mbf1");
  CliRun sim = run_cli({"simulate", "--gt", fx().gt, "--scale", "4", "--ms-out", sim_ms,
                        "--pan-out", sim_pan});
  CHECK(sim.code == 0);
  CHECK(sim.out.find("ms=") != std::string::npos);

  // Simulation writes a manifest next to the pan when none is requested.
  json man = parse_file(sim_pan + ".manifest.json");
  CHECK(man["command"] == "simulate");
  CHECK(man["true_transform"].is_null());
  CHECK(man["seed"] == 24601);
  std::vector<std::string> argv = man["argv"].get<std::vector<std::string>>();
  CHECK(argv.front() == "simulate");
  bool has_seed = false, has_ref = false;
  for (const std::string& a : argv) {
    has_seed = has_seed || a == "--seed=24601";
    has_ref = has_ref || a == "--no-reference-mode";
  }
  CHECK(has_seed);
  CHECK(has_ref);

  std::string fused = at("fused.mbf1"), report = at("report.json"), trace = at("trace.csv");
  CliRun fz = run_cli({"fuse", "--ms", sim_ms, "--pan", sim_pan, "--out", fused, "--lambda",
                       "0.1", "--max-outer", "12", "--tol", "1e-9", "--report", report,
                       "--trace", trace});
  CHECK(fz.code == 0);
  CHECK(fz.out.rfind("converged=", 0) == 0);
  CHECK(fz.out.find("outer_iterations=") != std::string::npos);
  CHECK(fz.out.find("final_objective=") != std::string::npos);
  CHECK(fz.out.find("theta=") == std::string::npos);  // not registering

  sirf::MultiBandImage out_img = sirf::load_image(fused);
  CHECK(out_img.rows == 64);
  CHECK(out_img.cols == 64);
  CHECK(out_img.bands == 3);

  json rep = parse_file(report);
  CHECK(rep["outer_iterations"] == 12);
  CHECK(rep["final_objective"].is_number());
  CHECK(rep["transform"]["kind"] == "translation");

  std::vector<std::string> tlines = read_lines(trace);
  CHECK(tlines.front() ==
        "iter,objective,data_term,regularizer,rel_change,seconds,kind,p0,p1,p2,p3,p4,p5");
  CHECK(tlines.size() == 13);  // header plus one row per outer iteration

  std::string mcsv = at("metrics.csv");
  CliRun mt = run_cli({"metrics", "--test", fused, "--reference", fx().gt, "--pan", sim_pan,
                       "--scale", "4", "--csv", mcsv});
  CHECK(mt.code == 0);
  json mj = json::parse(mt.out);  // no --out: report goes to stdout
  CHECK(mj["rmse"].is_number());
  CHECK(mj["psnr_db"].get<double>() > 0.0);

  std::vector<std::string> mlines = read_lines(mcsv);
  CHECK(mlines.front() ==
        "rmse,psnr_db,sam_degrees,ergas,rase,qave,mssim,fcc,scale,peak,"
        "rmse_band_0,rmse_band_1,rmse_band_2");
  CHECK(mlines.size() == 2);
}

TEST_CASE("shape conflicts exit with code 2 and name both shapes") {
  std::string odd = at("odd_pan.mbf1");
  sirf::save_mbf1(testimg::random_image(24, 24, 1, 1, 0.0, 255.0), odd);
  CliRun r = run_cli({"fuse", "--ms", fx().ms, "--pan", odd, "--out", at("never.mbf1")});
  CHECK(r.code == 2);
  CHECK(r.err.find("24x24x1") != std::string::npos);
  CHECK(r.err.find("16x16x3") != std::string::npos);

  CliRun s = run_cli({"fuse", "--ms", fx().ms, "--pan", fx().pan, "--out", at("never.mbf1"),
                      "--scale", "2"});
  CHECK(s.code == 2);
  CHECK(s.err.find("does not relate") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2, help with 0") {
  CHECK(run_cli({"fuse", "--nope"}).code == 2);
  CHECK(run_cli({"fuse"}).code == 2);
  CHECK(run_cli({}).code == 2);  // a subcommand is required

  CliRun help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("fuse") != std::string::npos);

  CliRun r = run_cli({"simulate", "--gt", fx().gt, "--ms-out", at("x.mbf1"), "--pan-out",
                      at("y.mbf1"), "--shift", "1,0", "--affine", "1,0,0,0,1,0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("mutually exclusive") != std::string::npos);

  CHECK(run_cli({"sweep", "--reference", fx().gt, "--pan", fx().pan, "--min", "3", "--max",
                 "1", "--out", at("s.csv")})
            .code == 2);
  CHECK(run_cli({"sweep", "--reference", fx().gt, "--pan", fx().pan, "--axis", "z", "--out",
                 at("s.csv")})
            .code == 2);
  CHECK(run_cli({"bench", "--sizes", "15", "--out", at("b.csv")}).code == 2);
  CHECK(run_cli({"bench", "--sizes", "30", "--scale", "4", "--out", at("b.csv")}).code == 2);
  CHECK(run_cli({"register", "--reference", fx().gt, "--moving", fx().pan, "--init",
                 "1,2,3"})
            .code == 2);
}

TEST_CASE("missing input files exit with code 1") {
  CliRun r = run_cli({"fuse", "--ms", at("ghost.mbf1"), "--pan", fx().pan, "--out",
                      at("never.mbf1")});
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot open") != std::string::npos);
}

TEST_CASE("sweep writes one row per shift with the argmin at the truth") {
  std::string csv = at("sweep.csv");
  CliRun r = run_cli({"sweep", "--reference", fx().gt, "--pan", fx().pan, "--min", "-10",
                      "--max", "10", "--out", csv});
  CHECK(r.code == 0);
  std::vector<std::string> lines = read_lines(csv);
  REQUIRE(lines.size() == 22);
  CHECK(lines.front() == "shift_x,shift_y,normalized_energy,overlap");

  double best = std::numeric_limits<double>::infinity(), best_sx = -99.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ls(lines[i]);
    std::string sx, sy, se, so;
    std::getline(ls, sx, ',');
    std::getline(ls, sy, ',');
    std::getline(ls, se, ',');
    std::getline(ls, so, ',');
    CHECK(std::stod(sy) == 0.0);
    CHECK(std::stol(so) > 0);
    double e = std::stod(se);
    if (e < best) {
      best = e;
      best_sx = std::stod(sx);
    }
  }
  // The pan is aligned, so the flattest gradient match is at zero shift.
  CHECK(best_sx == 0.0);

  std::string csvy = at("sweep_y.csv");
  CHECK(run_cli({"sweep", "--reference", fx().gt, "--pan", fx().pan, "--min", "-2", "--max",
                 "2", "--axis", "y", "--out", csvy})
            .code == 0);
  std::vector<std::string> ylines = read_lines(csvy);
  REQUIRE(ylines.size() == 6);
  CHECK(ylines[1].rfind("0,-2,", 0) == 0);
}

TEST_CASE("config files fill in options and explicit flags beat them") {
  std::string cfg = at("run.cfg");
  {
    std::ofstream os(cfg);
    os << "[fuse]\n"
       << "lambda=0.25\n"
       << "max-outer=7\n";
  }
  std::string out_a = at("cfg_a.mbf1"), man_a = at("cfg_a.json");
  CliRun a = run_cli({"--config", cfg, "--manifest", man_a, "fuse", "--ms", fx().ms, "--pan",
                      fx().pan, "--out", out_a, "--tol", "1e-12"});
  CHECK(a.code == 0);
  json ja = parse_file(man_a);
  CHECK(ja["options"]["lambda"].get<double>() == 0.25);
  CHECK(ja["options"]["max-outer"].get<int>() == 7);
  CHECK(a.out.find("outer_iterations=7 ") != std::string::npos);

  std::string out_b = at("cfg_b.mbf1"), man_b = at("cfg_b.json");
  CliRun b = run_cli({"--config", cfg, "--manifest", man_b, "fuse", "--ms", fx().ms, "--pan",
                      fx().pan, "--out", out_b, "--tol", "1e-12", "--max-outer", "9",
                      "--lambda", "0.4"});
  CHECK(b.code == 0);
  json jb = parse_file(man_b);
  CHECK(jb["options"]["lambda"].get<double>() == 0.4);
  CHECK(b.out.find("outer_iterations=9 ") != std::string::npos);
}

TEST_CASE("a manifest replays to the same bytes") {
  std::string out = at("replay.mbf1"), man = at("replay_manifest.json");
  CliRun first = run_cli({"--reference-mode", "--manifest", man, "fuse", "--ms", fx().ms,
                          "--pan", fx().pan, "--out", out, "--lambda", "0.15", "--max-outer",
                          "8", "--tol", "1e-12"});
  CHECK(first.code == 0);
  std::string bytes_first = read_bytes(out);

  std::vector<std::string> argv = parse_file(man)["argv"].get<std::vector<std::string>>();
  fs::remove(out);
  CliRun second = run_cli(argv);
  CHECK(second.code == 0);
  CHECK(read_bytes(out) == bytes_first);
}

TEST_CASE("thread settings change nothing but the clock") {
  std::string ref_out = at("th_ref.mbf1"), t3_out = at("th_3.mbf1"), env_out = at("th_env.mbf1");
  CHECK(run_cli({"--reference-mode", "fuse", "--ms", fx().ms, "--pan", fx().pan, "--out",
                 ref_out, "--max-outer", "6", "--tol", "1e-12"})
            .code == 0);
  CHECK(run_cli({"--threads", "3", "fuse", "--ms", fx().ms, "--pan", fx().pan, "--out",
                 t3_out, "--max-outer", "6", "--tol", "1e-12"})
            .code == 0);

  setenv("SIRF_THREADS", "2", 1);
  int env_code = run_cli({"fuse", "--ms", fx().ms, "--pan", fx().pan, "--out", env_out,
                          "--max-outer", "6", "--tol", "1e-12"})
                     .code;
  unsetenv("SIRF_THREADS");
  CHECK(env_code == 0);

  CHECK(read_bytes(t3_out) == read_bytes(ref_out));
  CHECK(read_bytes(env_out) == read_bytes(ref_out));
}

TEST_CASE("register reports a transform on stdout when unasked for a file") {
  CliRun r = run_cli({"register", "--reference", fx().gt, "--moving", fx().pan_shift,
                      "--steps", "8"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["kind"] == "translation");
  REQUIRE(j["theta"].size() == 2);
  CHECK(std::isfinite(j["theta"][0].get<double>()));
  CHECK(j["steps"].get<int>() > 0);

  std::string tj = at("reg.json");
  CliRun w = run_cli({"register", "--reference", fx().gt, "--moving", fx().pan_shift,
                      "--steps", "8", "--init", "0.5,-0.5", "--out", tj});
  CHECK(w.code == 0);
  CHECK(w.out.rfind("theta=", 0) == 0);
  CHECK(parse_file(tj)["theta"].size() == 2);
}

TEST_CASE("denoise smooths an image in place") {
  std::string out = at("den.mbf1");
  CliRun r = run_cli({"denoise", "--in", fx().pan_shift, "--out", out, "--lambda", "0.5",
                      "--iters", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("objective=", 0) == 0);
  sirf::MultiBandImage den = sirf::load_image(out);
  CHECK(den.rows == 64);
  CHECK(den.bands == 1);
}

TEST_CASE("bench reports a time per size") {
  std::string csv = at("bench.csv");
  CliRun r = run_cli({"bench", "--sizes", "32,64", "--scale", "4", "--outer", "3", "--out",
                      csv});
  CHECK(r.code == 0);
  std::vector<std::string> lines = read_lines(csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines.front() ==
        "size,rows,cols,bands,scale,outer_iterations,seconds_total,seconds_per_iteration");
  CHECK(lines[1].rfind("32,32,32,4,4,3,", 0) == 0);
  CHECK(lines[2].rfind("64,64,64,4,4,3,", 0) == 0);
  CHECK(r.out.find("size=32") != std::string::npos);
  CHECK(r.out.find("size=64") != std::string::npos);
}
