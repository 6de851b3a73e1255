#include "cli_main.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sirf/image_io.hpp"
#include "sirf/metrics.hpp"
#include "sirf/parallel.hpp"
#include "sirf/registration.hpp"
#include "sirf/simulate.hpp"
#include "sirf/solver.hpp"
#include "sirf/vtv_denoise.hpp"

namespace sirf {
namespace {

using nlohmann::json;

std::string iso_utc(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

const char* kind_name(TransformKind k) {
  return k == TransformKind::Translation ? "translation" : "affine";
}

TransformKind parse_kind(const std::string& s) {
  if (s == "translation") return TransformKind::Translation;
  if (s == "affine") return TransformKind::Affine;
  throw CLI::ValidationError("--kind", "must be 'translation' or 'affine'");
}

std::vector<double> theta_vec(const TransformParams& t) {
  int n = t.kind == TransformKind::Translation ? 2 : 6;
  return std::vector<double>(t.theta.begin(), t.theta.begin() + n);
}

// Columns shared by every trace that carries a transform snapshot; a
// translation fills p0,p1 and zeros the rest.
void write_theta_cols(std::ostream& os, const TransformParams& t) {
  os << ',' << kind_name(t.kind);
  for (int i = 0; i < 6; ++i)
    os << ',' << fmt(i < (t.kind == TransformKind::Translation ? 2 : 6) ? t.theta[i] : 0.0);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

void write_fuse_trace(const std::string& path, const ConvergenceTrace& tr) {
  auto os = open_out(path);
  os << "iter,objective,data_term,regularizer,rel_change,seconds,kind,p0,p1,p2,p3,p4,p5\n";
  for (const auto& it : tr.iterations) {
    os << it.k << ',' << fmt(it.objective) << ',' << fmt(it.data_term) << ','
       << fmt(it.regularizer) << ',' << fmt(it.rel_change) << ',' << fmt(it.seconds);
    write_theta_cols(os, it.theta);
    os << '\n';
  }
}

void write_reg_trace(const std::string& path, const RegistrationTrace& tr) {
  auto os = open_out(path);
  os << "step,level,normalized_energy,step_size,overlap,kind,p0,p1,p2,p3,p4,p5\n";
  int k = 0;
  for (const auto& st : tr.steps) {
    os << k++ << ',' << st.level << ',' << fmt(st.normalized_energy) << ',' << fmt(st.step)
       << ',' << st.overlap;
    write_theta_cols(os, st.theta);
    os << '\n';
  }
}

// Per-run metadata shared by all subcommands and mirrored into the manifest.
struct Global {
  int threads = 0;
  bool reference = false;
  std::uint64_t seed = 24601;
  std::string manifest;
};

struct RunRecord {
  std::string command;
  json options = json::object();
  json extra = json::object();  // top-level manifest fields beyond the options
  std::vector<std::string> inputs, outputs;
  std::chrono::system_clock::time_point started;
};

void write_manifest(const std::string& path, const Global& g, const RunRecord& rec) {
  json m;
  m["tool"] = "sirf 0.1.0";
  m["command"] = rec.command;
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["reference_mode"] = g.reference;
  m["options"] = rec.options;
  m["inputs"] = rec.inputs;
  m["outputs"] = rec.outputs;
  m["started"] = iso_utc(rec.started);
  m["finished"] = iso_utc(std::chrono::system_clock::now());
  for (auto& [key, val] : rec.extra.items()) m[key] = val;

  // Resolved argument vector with config values baked in, so replaying it
  // reproduces the run without the original config file.  Single-token
  // --key=value form keeps negative numbers unambiguous.
  std::vector<std::string> argv{rec.command};
  for (auto& [key, val] : rec.options.items()) {
    if (val.is_boolean()) {
      argv.push_back((val.get<bool>() ? "--" : "--no-") + key);
    } else if (val.is_array()) {
      std::string joined;
      for (auto& v : val) joined += (joined.empty() ? "" : ",") + fmt(v.get<double>());
      argv.push_back("--" + key + "=" + joined);
    } else if (val.is_string()) {
      if (!val.get<std::string>().empty())
        argv.push_back("--" + key + "=" + val.get<std::string>());
    } else {
      argv.push_back("--" + key + "=" +
                     (val.is_number_integer() ? std::to_string(val.get<long long>())
                                              : fmt(val.get<double>())));
    }
  }
  argv.push_back("--seed=" + std::to_string(g.seed));
  if (g.threads > 0) argv.push_back("--threads=" + std::to_string(g.threads));
  argv.push_back(g.reference ? "--reference-mode" : "--no-reference-mode");
  m["argv"] = argv;

  auto os = open_out(path);
  os << m.dump(2) << '\n';
}

// ---- fuse ----

struct FuseOpts {
  std::string ms, pan, out, trace, reg_trace, report;
  double lambda = 0.1, tol = 1e-3, epsilon = 1e-10, eta = 0.8, step_constant = 1.0;
  int scale = 0, max_outer = 300, min_outer = 10, inner_iters = 3, reg_first_k = 3,
      levels = 0, reg_steps = 3;
  bool reg = false, warm_start = true, prescale = true;
  std::string kind = "translation";
  int bit_depth = 8;
};

int run_fuse(const Global& g, const FuseOpts& o, RunRecord& rec) {
  MultiBandImage ms = load_image(o.ms);
  MultiBandImage pan = load_image(o.pan);
  rec.inputs = {o.ms, o.pan};
  if (o.scale > 0 && (pan.rows != ms.rows * o.scale || pan.cols != ms.cols * o.scale))
    throw std::invalid_argument("fuse: --scale " + std::to_string(o.scale) +
                                " does not relate pan " + pan.shape_string() + " to ms " +
                                ms.shape_string());

  SolverConfig cfg;
  cfg.lambda = o.lambda;
  cfg.max_outer = o.max_outer;
  cfg.min_outer = o.min_outer;
  cfg.tol = o.tol;
  cfg.inner_denoise_iters = o.inner_iters;
  cfg.reg_enabled = o.reg;
  cfg.reg_first_k = o.reg_first_k;
  cfg.reg_kind = parse_kind(o.kind);
  cfg.reg.epsilon = o.epsilon;
  cfg.reg.eta = o.eta;
  cfg.reg.pyramid_levels = o.levels;
  cfg.reg.inner_iters = o.reg_steps;
  cfg.step_constant = o.step_constant;
  cfg.warm_start_dual = o.warm_start;
  cfg.prescale = o.prescale;

  FuseResult res = sirf_fuse(ms, pan, cfg);

  save_image(res.image, o.out, o.bit_depth);
  rec.outputs.push_back(o.out);
  if (!o.trace.empty()) {
    write_fuse_trace(o.trace, res.trace);
    rec.outputs.push_back(o.trace);
  }
  if (!o.reg_trace.empty()) {
    write_reg_trace(o.reg_trace, res.registration);
    rec.outputs.push_back(o.reg_trace);
  }

  const auto& its = res.trace.iterations;
  if (!o.report.empty()) {
    json r;
    r["converged"] = res.trace.converged;
    r["outer_iterations"] = res.trace.outer_iterations;
    r["initial_objective"] = its.empty() ? 0.0 : its.front().objective;
    r["final_objective"] = its.empty() ? 0.0 : its.back().objective;
    r["step_constant"] = res.trace.step_constant;
    r["operator_norm_estimate"] = res.trace.operator_norm_estimate;
    r["transform"] = {{"kind", kind_name(res.transform.kind)},
                      {"theta", theta_vec(res.transform)}};
    auto os = open_out(o.report);
    os << r.dump(2) << '\n';
    rec.outputs.push_back(o.report);
  }

  std::cout << "converged=" << (res.trace.converged ? "true" : "false")
            << " outer_iterations=" << res.trace.outer_iterations << " final_objective="
            << fmt(its.empty() ? 0.0 : its.back().objective);
  if (cfg.reg_enabled) {
    std::cout << " theta=";
    auto tv = theta_vec(res.transform);
    for (std::size_t i = 0; i < tv.size(); ++i) std::cout << (i ? "," : "") << fmt(tv[i]);
  }
  std::cout << '\n';
  return 0;
}

// ---- register ----

struct RegisterOpts {
  std::string reference, moving, out, trace;
  std::string kind = "translation";
  std::vector<double> init;
  double epsilon = 1e-10, eta = 0.8, step = 1.0;
  int levels = 0, steps = 3, max_backtracks = 30;
};

int run_register(const Global& g, const RegisterOpts& o, RunRecord& rec) {
  MultiBandImage ref = load_image(o.reference);
  MultiBandImage mov = load_image(o.moving);
  rec.inputs = {o.reference, o.moving};

  TransformParams init = TransformParams::identity(parse_kind(o.kind));
  if (!o.init.empty()) {
    std::size_t want = init.kind == TransformKind::Translation ? 2 : 6;
    if (o.init.size() != want)
      throw std::invalid_argument("register: --init needs " + std::to_string(want) +
                                  " values for kind " + o.kind);
    for (std::size_t i = 0; i < want; ++i) init.theta[i] = o.init[i];
  }

  RegistrationConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.eta = o.eta;
  cfg.initial_step = o.step;
  cfg.pyramid_levels = o.levels;
  cfg.inner_iters = o.steps;
  cfg.max_backtracks = o.max_backtracks;

  RegistrationResult res = register_images(ref, mov, init, cfg);

  json r;
  r["kind"] = kind_name(res.theta.kind);
  r["theta"] = theta_vec(res.theta);
  r["steps"] = res.trace.steps.size();
  r["normalized_energy"] =
      res.trace.steps.empty() ? 0.0 : res.trace.steps.back().normalized_energy;
  std::string body = r.dump(2);
  if (o.out.empty()) {
    std::cout << body << '\n';
  } else {
    auto os = open_out(o.out);
    os << body << '\n';
    rec.outputs.push_back(o.out);
    std::cout << "theta=";
    auto tv = theta_vec(res.theta);
    for (std::size_t i = 0; i < tv.size(); ++i) std::cout << (i ? "," : "") << fmt(tv[i]);
    std::cout << '\n';
  }
  if (!o.trace.empty()) {
    write_reg_trace(o.trace, res.trace);
    rec.outputs.push_back(o.trace);
  }
  return 0;
}

// ---- denoise ----

struct DenoiseOpts {
  std::string in, out, ref;
  double lambda = 0.1;
  int iters = 3, bit_depth = 8;
};

int run_denoise(const Global& g, const DenoiseOpts& o, RunRecord& rec) {
  MultiBandImage y = load_image(o.in);
  rec.inputs = {o.in};
  MultiBandImage ref(y.rows, y.cols, y.bands);  // zero reference: plain VTV
  if (!o.ref.empty()) {
    ref = load_image(o.ref);
    rec.inputs.push_back(o.ref);
  }
  DenoiseResult res = vtv_denoise(y, ref, o.lambda, o.iters);
  save_image(res.x, o.out, o.bit_depth);
  rec.outputs.push_back(o.out);
  std::cout << "objective=" << fmt(vtv_objective(res.x, y, ref, o.lambda)) << '\n';
  return 0;
}

// ---- metrics ----

struct MetricsOpts {
  std::string test, reference, pan, out, csv;
  int scale = 4;
  double peak = 255.0;
};

json metrics_json(const MetricsReport& r) {
  json j;
  j["rmse"] = r.rmse;
  j["band_rmse"] = r.band_rmse;
  j["psnr_db"] = r.psnr_db;
  j["sam_degrees"] = r.sam_degrees;
  j["ergas"] = r.ergas;
  j["rase"] = r.rase;
  j["qave"] = r.qave;
  j["mssim"] = r.mssim;
  j["fcc"] = r.fcc;
  j["scale"] = r.scale;
  j["peak"] = r.peak;
  return j;
}

int run_metrics(const Global& g, const MetricsOpts& o, RunRecord& rec) {
  MultiBandImage x = load_image(o.test);
  MultiBandImage ref = load_image(o.reference);
  rec.inputs = {o.test, o.reference};
  MultiBandImage pan;
  bool has_pan = !o.pan.empty();
  if (has_pan) {
    pan = load_image(o.pan);
    rec.inputs.push_back(o.pan);
  }
  MetricsReport r = compute_metrics(x, ref, has_pan ? &pan : nullptr, o.scale, o.peak);

  std::string body = metrics_json(r).dump(2);
  if (o.out.empty()) {
    std::cout << body << '\n';
  } else {
    auto os = open_out(o.out);
    os << body << '\n';
    rec.outputs.push_back(o.out);
  }
  if (!o.csv.empty()) {
    auto os = open_out(o.csv);
    os << "rmse,psnr_db,sam_degrees,ergas,rase,qave,mssim,fcc,scale,peak";
    for (std::size_t d = 0; d < r.band_rmse.size(); ++d) os << ",rmse_band_" << d;
    os << '\n'
       << fmt(r.rmse) << ',' << fmt(r.psnr_db) << ',' << fmt(r.sam_degrees) << ','
       << fmt(r.ergas) << ',' << fmt(r.rase) << ',' << fmt(r.qave) << ',' << fmt(r.mssim)
       << ',' << fmt(r.fcc) << ',' << r.scale << ',' << fmt(r.peak);
    for (double v : r.band_rmse) os << ',' << fmt(v);
    os << '\n';
    rec.outputs.push_back(o.csv);
  }
  return 0;
}

// ---- simulate ----

struct SimulateOpts {
  std::string gt, ms_out, pan_out;
  int scale = 4;
  std::vector<double> weights, shift, affine;
  int bit_depth = 8;
};

int run_simulate(const Global& g, const SimulateOpts& o, RunRecord& rec) {
  MultiBandImage gt = load_image(o.gt);
  rec.inputs = {o.gt};
  std::vector<double> w = o.weights.empty() ? uniform_weights(gt.bands) : o.weights;

  std::optional<TransformParams> theta;
  if (!o.shift.empty() && !o.affine.empty())
    throw std::invalid_argument("simulate: --shift and --affine are mutually exclusive");
  if (!o.shift.empty()) {
    if (o.shift.size() != 2)
      throw std::invalid_argument("simulate: --shift needs tx,ty");
    TransformParams t = TransformParams::identity(TransformKind::Translation);
    t.theta[0] = o.shift[0];
    t.theta[1] = o.shift[1];
    theta = t;
  }
  if (!o.affine.empty()) {
    if (o.affine.size() != 6)
      throw std::invalid_argument("simulate: --affine needs a11,a12,b1,a21,a22,b2");
    TransformParams t = TransformParams::identity(TransformKind::Affine);
    for (int i = 0; i < 6; ++i) t.theta[i] = o.affine[i];
    theta = t;
  }

  SimulatedPair pair = simulate(gt, o.scale, w, theta);
  save_image(pair.ms, o.ms_out, o.bit_depth);
  save_image(pair.pan, o.pan_out, o.bit_depth);
  rec.outputs = {o.ms_out, o.pan_out};

  rec.extra["true_transform"] =
      theta ? json({{"kind", kind_name(theta->kind)}, {"theta", theta_vec(*theta)}})
            : json();
  std::cout << "ms=" << o.ms_out << " pan=" << o.pan_out << '\n';
  return 0;
}

// ---- sweep ----

struct SweepOpts {
  std::string reference, pan, out;
  int lo = -10, hi = 10;
  std::string axis = "x";
  double epsilon = 1e-10;
};

int run_sweep(const Global& g, const SweepOpts& o, RunRecord& rec) {
  MultiBandImage ref = load_image(o.reference);
  MultiBandImage pan = load_image(o.pan);
  rec.inputs = {o.reference, o.pan};
  if (o.lo > o.hi) throw std::invalid_argument("sweep: --min must be <= --max");
  if (o.axis != "x" && o.axis != "y")
    throw std::invalid_argument("sweep: --axis must be 'x' or 'y'");

  auto os = open_out(o.out);
  os << "shift_x,shift_y,normalized_energy,overlap\n";
  for (int t = o.lo; t <= o.hi; ++t) {
    TransformParams tp = TransformParams::identity(TransformKind::Translation);
    (o.axis == "x" ? tp.theta[0] : tp.theta[1]) = t;
    DgsEnergy e = dgs_energy(ref, pan, tp, o.epsilon);
    os << fmt(tp.theta[0]) << ',' << fmt(tp.theta[1]) << ',' << fmt(e.normalized()) << ','
       << e.overlap << '\n';
  }
  rec.outputs.push_back(o.out);
  return 0;
}

// ---- bench ----

struct BenchOpts {
  std::string out;
  std::vector<int> sizes{128, 256, 384, 512};
  int scale = 4, outer = 10, bands = 4;
  double lambda = 0.1;
};

int run_bench(const Global& g, const BenchOpts& o, RunRecord& rec) {
  auto os = open_out(o.out);
  os << "size,rows,cols,bands,scale,outer_iterations,seconds_total,seconds_per_iteration\n";
  for (int size : o.sizes) {
    if (size < 16 || size % o.scale != 0)
      throw std::invalid_argument("bench: size " + std::to_string(size) +
                                  " must be >= 16 and divisible by the scale");
    SceneConfig sc;
    sc.rows = sc.cols = size;
    sc.bands = o.bands;
    MultiBandImage gt = make_test_scene(sc, g.seed);
    SimulatedPair pair = simulate(gt, o.scale, uniform_weights(o.bands));

    SolverConfig cfg;
    cfg.lambda = o.lambda;
    cfg.max_outer = o.outer;
    cfg.tol = 1e-12;  // run the full budget so timings are comparable
    auto t0 = std::chrono::steady_clock::now();
    FuseResult res = sirf_fuse(pair.ms, pair.pan, cfg);
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int iters = res.trace.outer_iterations;
    os << size << ',' << size << ',' << size << ',' << o.bands << ',' << o.scale << ','
       << iters << ',' << fmt(total) << ',' << fmt(total / std::max(1, iters)) << '\n';
    std::cout << "size=" << size << " seconds_total=" << fmt(total) << '\n';
  }
  rec.outputs.push_back(o.out);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Pan-sharpening by joint registration and variational fusion"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key=value config file; command line flags win");

  Global g;
  app.add_option("--threads", g.threads, "Worker threads for the per-pixel kernels")
      ->envname("SIRF_THREADS");
  app.add_flag("--reference-mode,!--no-reference-mode", g.reference,
               "Force deterministic single-threaded kernels");
  app.add_option("--seed", g.seed, "Seed for synthetic data generation");
  app.add_option("--manifest", g.manifest, "Write a JSON run manifest to this path");

  FuseOpts fo;
  CLI::App* fuse = app.add_subcommand("fuse", "Fuse a low-resolution image with a pan image");
  fuse->add_option("--ms", fo.ms, "Low-resolution multi-band input")->required();
  fuse->add_option("--pan", fo.pan, "High-resolution single-band input")->required();
  fuse->add_option("--out", fo.out, "Fused output image")->required();
  fuse->add_option("--lambda", fo.lambda, "Regularization weight");
  fuse->add_option("--scale", fo.scale, "Expected resolution ratio (0 = derive from dims)");
  fuse->add_flag("--register,!--no-register", fo.reg, "Estimate the pan alignment while fusing");
  fuse->add_option("--kind", fo.kind, "Transform kind: translation or affine");
  fuse->add_option("--max-outer", fo.max_outer, "Outer iteration cap");
  fuse->add_option("--min-outer", fo.min_outer, "Iterations before the stop test arms");
  fuse->add_option("--tol", fo.tol, "Relative-change stopping tolerance");
  fuse->add_option("--inner-iters", fo.inner_iters, "Denoise prox iterations per outer step");
  fuse->add_option("--reg-first-k", fo.reg_first_k, "Register only during the first k iterations");
  fuse->add_option("--reg-steps", fo.reg_steps, "Accepted descent steps per pyramid level");
  fuse->add_option("--epsilon", fo.epsilon, "Registration energy smoothing");
  fuse->add_option("--eta", fo.eta, "Backtracking shrink factor");
  fuse->add_option("--levels", fo.levels, "Pyramid levels (0 = auto)");
  fuse->add_option("--step-constant", fo.step_constant, "Gradient step constant L");
  fuse->add_flag("--warm-start,!--no-warm-start", fo.warm_start,
                 "Carry denoiser duals across outer iterations");
  fuse->add_flag("--prescale,!--no-prescale", fo.prescale,
                 "Rescale inputs to 0-255 before solving");
  fuse->add_option("--trace", fo.trace, "Write per-iteration CSV trace here");
  fuse->add_option("--reg-trace", fo.reg_trace, "Write registration step CSV here");
  fuse->add_option("--report", fo.report, "Write a JSON run report here");
  fuse->add_option("--bit-depth", fo.bit_depth, "Quantization depth for integer outputs");

  RegisterOpts ro;
  CLI::App* reg = app.add_subcommand("register", "Align a pan image against a reference");
  reg->add_option("--reference", ro.reference, "Image held fixed")->required();
  reg->add_option("--moving", ro.moving, "Pan image to align")->required();
  reg->add_option("--kind", ro.kind, "Transform kind: translation or affine");
  reg->add_option("--init", ro.init, "Initial parameters (comma separated)")->delimiter(',');
  reg->add_option("--epsilon", ro.epsilon, "Energy smoothing");
  reg->add_option("--eta", ro.eta, "Backtracking shrink factor");
  reg->add_option("--step", ro.step, "Initial step size per level");
  reg->add_option("--levels", ro.levels, "Pyramid levels (0 = auto)");
  reg->add_option("--steps", ro.steps, "Accepted descent steps per level");
  reg->add_option("--max-backtracks", ro.max_backtracks, "Backtracking cap per step");
  reg->add_option("--out", ro.out, "Write the transform JSON here (default stdout)");
  reg->add_option("--trace", ro.trace, "Write step CSV trace here");

  DenoiseOpts dn;
  CLI::App* den = app.add_subcommand("denoise", "Vector total-variation denoising");
  den->add_option("--in", dn.in, "Input image")->required();
  den->add_option("--out", dn.out, "Output image")->required();
  den->add_option("--ref", dn.ref, "Gradient reference image (default zero)");
  den->add_option("--lambda", dn.lambda, "Regularization weight");
  den->add_option("--iters", dn.iters, "Dual projection iterations");
  den->add_option("--bit-depth", dn.bit_depth, "Quantization depth for integer outputs");

  MetricsOpts mo;
  CLI::App* met = app.add_subcommand("metrics", "Quality scores against a reference");
  met->add_option("--test", mo.test, "Image under test")->required();
  met->add_option("--reference", mo.reference, "Ground-truth image")->required();
  met->add_option("--pan", mo.pan, "Pan image for the correlation score");
  met->add_option("--scale", mo.scale, "Resolution ratio used by the ERGAS factor");
  met->add_option("--peak", mo.peak, "Peak signal value");
  met->add_option("--out", mo.out, "Write the JSON report here (default stdout)");
  met->add_option("--csv", mo.csv, "Write a one-row CSV report here");

  SimulateOpts so;
  CLI::App* sim = app.add_subcommand("simulate", "Derive observation pair from ground truth");
  sim->add_option("--gt", so.gt, "Ground-truth multi-band image")->required();
  sim->add_option("--scale", so.scale, "Downsampling factor");
  sim->add_option("--weights", so.weights, "Pan synthesis weights (default uniform)")
      ->delimiter(',');
  sim->add_option("--shift", so.shift, "Translate the pan by tx,ty")->delimiter(',');
  sim->add_option("--affine", so.affine, "Warp the pan by a11,a12,b1,a21,a22,b2")
      ->delimiter(',');
  sim->add_option("--ms-out", so.ms_out, "Low-resolution output path")->required();
  sim->add_option("--pan-out", so.pan_out, "Pan output path")->required();
  sim->add_option("--bit-depth", so.bit_depth, "Quantization depth for integer outputs");

  SweepOpts wo;
  CLI::App* swp = app.add_subcommand("sweep", "Integer-translation similarity curve");
  swp->add_option("--reference", wo.reference, "Image held fixed")->required();
  swp->add_option("--pan", wo.pan, "Pan image swept over translations")->required();
  swp->add_option("--min", wo.lo, "Smallest shift");
  swp->add_option("--max", wo.hi, "Largest shift");
  swp->add_option("--axis", wo.axis, "Shift axis: x or y");
  swp->add_option("--epsilon", wo.epsilon, "Energy smoothing");
  swp->add_option("--out", wo.out, "Output CSV")->required();

  BenchOpts bo;
  CLI::App* ben = app.add_subcommand("bench", "Size-scaling timing study");
  ben->add_option("--sizes", bo.sizes, "Scene sizes to run")->delimiter(',');
  ben->add_option("--scale", bo.scale, "Downsampling factor");
  ben->add_option("--outer", bo.outer, "Outer iterations per size");
  ben->add_option("--bands", bo.bands, "Scene band count");
  ben->add_option("--lambda", bo.lambda, "Regularization weight");
  ben->add_option("--out", bo.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  set_reference_mode(g.reference);
  if (g.threads > 0) set_thread_count(g.threads);

  RunRecord rec;
  rec.started = std::chrono::system_clock::now();
  try {
    int rc = 0;
    if (*fuse) {
      rec.command = "fuse";
      rec.options = {{"ms", fo.ms},
                     {"pan", fo.pan},
                     {"out", fo.out},
                     {"lambda", fo.lambda},
                     {"scale", fo.scale},
                     {"register", fo.reg},
                     {"kind", fo.kind},
                     {"max-outer", fo.max_outer},
                     {"min-outer", fo.min_outer},
                     {"tol", fo.tol},
                     {"inner-iters", fo.inner_iters},
                     {"reg-first-k", fo.reg_first_k},
                     {"reg-steps", fo.reg_steps},
                     {"epsilon", fo.epsilon},
                     {"eta", fo.eta},
                     {"levels", fo.levels},
                     {"step-constant", fo.step_constant},
                     {"warm-start", fo.warm_start},
                     {"prescale", fo.prescale},
                     {"trace", fo.trace},
                     {"reg-trace", fo.reg_trace},
                     {"report", fo.report},
                     {"bit-depth", fo.bit_depth}};
      rc = run_fuse(g, fo, rec);
    } else if (*reg) {
      rec.command = "register";
      rec.options = {{"reference", ro.reference}, {"moving", ro.moving},
                     {"kind", ro.kind},           {"epsilon", ro.epsilon},
                     {"eta", ro.eta},             {"step", ro.step},
                     {"levels", ro.levels},       {"steps", ro.steps},
                     {"max-backtracks", ro.max_backtracks},
                     {"out", ro.out},             {"trace", ro.trace}};
      if (!ro.init.empty()) rec.options["init"] = ro.init;
      rc = run_register(g, ro, rec);
    } else if (*den) {
      rec.command = "denoise";
      rec.options = {{"in", dn.in},         {"out", dn.out},     {"ref", dn.ref},
                     {"lambda", dn.lambda}, {"iters", dn.iters}, {"bit-depth", dn.bit_depth}};
      rc = run_denoise(g, dn, rec);
    } else if (*met) {
      rec.command = "metrics";
      rec.options = {{"test", mo.test}, {"reference", mo.reference}, {"pan", mo.pan},
                     {"scale", mo.scale}, {"peak", mo.peak},         {"out", mo.out},
                     {"csv", mo.csv}};
      rc = run_metrics(g, mo, rec);
    } else if (*sim) {
      rec.command = "simulate";
      rec.options = {{"gt", so.gt},           {"scale", so.scale},
                     {"ms-out", so.ms_out},   {"pan-out", so.pan_out},
                     {"bit-depth", so.bit_depth}};
      if (!so.weights.empty()) rec.options["weights"] = so.weights;
      if (!so.shift.empty()) rec.options["shift"] = so.shift;
      if (!so.affine.empty()) rec.options["affine"] = so.affine;
      // Simulation always records its ground truth transform.
      if (g.manifest.empty()) g.manifest = so.pan_out + ".manifest.json";
      rc = run_simulate(g, so, rec);
    } else if (*swp) {
      rec.command = "sweep";
      rec.options = {{"reference", wo.reference}, {"pan", wo.pan}, {"min", wo.lo},
                     {"max", wo.hi},              {"axis", wo.axis},
                     {"epsilon", wo.epsilon},     {"out", wo.out}};
      rc = run_sweep(g, wo, rec);
    } else if (*ben) {
      rec.command = "bench";
      rec.options = {{"sizes", bo.sizes},   {"scale", bo.scale}, {"outer", bo.outer},
                     {"bands", bo.bands},   {"lambda", bo.lambda}, {"out", bo.out}};
      rc = run_bench(g, bo, rec);
    }
    if (rc == 0 && !g.manifest.empty()) {
      write_manifest(g.manifest, g, rec);
      rec.outputs.push_back(g.manifest);
    }
    return rc;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sirf
