#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "sirf/image_io.hpp"
#include "sirf/metrics.hpp"
#include "sirf/parallel.hpp"
#include "sirf/registration.hpp"
#include "sirf/simulate.hpp"
#include "sirf/solver.hpp"
#include "sirf/vtv_denoise.hpp"

namespace py = pybind11;
using namespace sirf;

namespace {

// Arrays cross the boundary as float64 (rows, cols, bands); a 2D array is a
// single band.  Internal storage is band-major, so both directions copy.
MultiBandImage to_image(const py::array& arr, const char* what) {
  auto a = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(arr);
  if (!a) throw std::invalid_argument(std::string(what) + ": expected a numeric array");
  if (a.ndim() != 2 && a.ndim() != 3)
    throw std::invalid_argument(std::string(what) + ": expected a 2D or 3D array, got " +
                                std::to_string(a.ndim()) + "D");
  int m = static_cast<int>(a.shape(0));
  int n = static_cast<int>(a.shape(1));
  int s = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  MultiBandImage img(m, n, s);
  const double* src = a.data();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      for (int d = 0; d < s; ++d)
        img.at(i, j, d) = src[(static_cast<std::size_t>(i) * n + j) * s + d];
  ensure_valid(img, what);
  return img;
}

py::array to_array(const MultiBandImage& img) {
  if (img.bands == 1) {
    py::array_t<double> out({img.rows, img.cols});
    double* dst = out.mutable_data();
    for (int i = 0; i < img.rows; ++i)
      for (int j = 0; j < img.cols; ++j)
        dst[static_cast<std::size_t>(i) * img.cols + j] = img.at(i, j, 0);
    return out;
  }
  py::array_t<double> out({img.rows, img.cols, img.bands});
  double* dst = out.mutable_data();
  for (int i = 0; i < img.rows; ++i)
    for (int j = 0; j < img.cols; ++j)
      for (int d = 0; d < img.bands; ++d)
        dst[(static_cast<std::size_t>(i) * img.cols + j) * img.bands + d] = img.at(i, j, d);
  return out;
}

TransformKind kind_from(const std::string& s) {
  if (s == "translation") return TransformKind::Translation;
  if (s == "affine") return TransformKind::Affine;
  throw std::invalid_argument("kind must be 'translation' or 'affine'");
}

TransformParams params_from(const std::string& kind, const std::vector<double>& theta) {
  TransformParams t = TransformParams::identity(kind_from(kind));
  std::size_t want = t.kind == TransformKind::Translation ? 2 : 6;
  if (!theta.empty()) {
    if (theta.size() != want)
      throw std::invalid_argument("theta needs " + std::to_string(want) + " values for " + kind);
    for (std::size_t i = 0; i < want; ++i) t.theta[i] = theta[i];
  }
  return t;
}

py::dict transform_dict(const TransformParams& t) {
  py::dict d;
  d["kind"] = t.kind == TransformKind::Translation ? "translation" : "affine";
  int n = t.kind == TransformKind::Translation ? 2 : 6;
  d["theta"] = std::vector<double>(t.theta.begin(), t.theta.begin() + n);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Pan-sharpening by joint registration and variational fusion";

  mod.def(
      "fuse",
      [](const py::array& ms, const py::array& pan, double lam, int max_outer, double tol,
         int inner_iters, bool do_register, int reg_first_k, int reg_steps,
         const std::string& kind, bool warm_start, bool prescale) {
        SolverConfig cfg;
        cfg.lambda = lam;
        cfg.max_outer = max_outer;
        cfg.tol = tol;
        cfg.inner_denoise_iters = inner_iters;
        cfg.reg_enabled = do_register;
        cfg.reg_first_k = reg_first_k;
        cfg.reg.inner_iters = reg_steps;
        cfg.reg_kind = kind_from(kind);
        cfg.warm_start_dual = warm_start;
        cfg.prescale = prescale;
        FuseResult res = sirf_fuse(to_image(ms, "ms"), to_image(pan, "pan"), cfg);
        py::dict d;
        d["image"] = to_array(res.image);
        d["transform"] = transform_dict(res.transform);
        d["converged"] = res.trace.converged;
        d["outer_iterations"] = res.trace.outer_iterations;
        std::vector<double> obj, rel;
        for (const auto& it : res.trace.iterations) {
          obj.push_back(it.objective);
          rel.push_back(it.rel_change);
        }
        d["objectives"] = obj;
        d["rel_changes"] = rel;
        return d;
      },
      py::arg("ms"), py::arg("pan"), py::arg("lam") = 0.1, py::arg("max_outer") = 300,
      py::arg("tol") = 1e-3, py::arg("inner_iters") = 3, py::arg("register_pan") = false,
      py::arg("reg_first_k") = 3, py::arg("reg_steps") = 3, py::arg("kind") = "translation",
      py::arg("warm_start") = true, py::arg("prescale") = true,
      "Fuse a low-resolution multi-band image with a high-resolution pan image.");

  mod.def(
      "register_images",
      [](const py::array& reference, const py::array& moving, const std::string& kind,
         const std::vector<double>& init, double epsilon, int levels, int steps, double eta) {
        RegistrationConfig cfg;
        cfg.epsilon = epsilon;
        cfg.pyramid_levels = levels;
        cfg.inner_iters = steps;
        cfg.eta = eta;
        RegistrationResult res =
            register_images(to_image(reference, "reference"), to_image(moving, "moving"),
                            params_from(kind, init), cfg);
        py::dict d = transform_dict(res.theta);
        d["steps"] = res.trace.steps.size();
        d["normalized_energy"] =
            res.trace.steps.empty() ? 0.0 : res.trace.steps.back().normalized_energy;
        return d;
      },
      py::arg("reference"), py::arg("moving"), py::arg("kind") = "translation",
      py::arg("init") = std::vector<double>{}, py::arg("epsilon") = 1e-10,
      py::arg("levels") = 0, py::arg("steps") = 3, py::arg("eta") = 0.8,
      "Estimate the transform aligning `moving` to `reference`.");

  mod.def(
      "denoise",
      [](const py::array& y, double lam, int iters, const std::optional<py::array>& reference) {
        MultiBandImage yi = to_image(y, "y");
        MultiBandImage ref =
            reference ? to_image(*reference, "reference")
                      : MultiBandImage(yi.rows, yi.cols, yi.bands);
        return to_array(vtv_denoise(yi, ref, lam, iters).x);
      },
      py::arg("y"), py::arg("lam"), py::arg("iters") = 3,
      py::arg("reference") = std::nullopt,
      "Vector total-variation denoising, optionally relative to a gradient reference.");

  mod.def(
      "metrics",
      [](const py::array& test, const py::array& reference,
         const std::optional<py::array>& pan, int scale, double peak) {
        MultiBandImage x = to_image(test, "test");
        MultiBandImage g = to_image(reference, "reference");
        std::optional<MultiBandImage> p;
        if (pan) p = to_image(*pan, "pan");
        MetricsReport r = compute_metrics(x, g, p ? &*p : nullptr, scale, peak);
        py::dict d;
        d["rmse"] = r.rmse;
        d["band_rmse"] = r.band_rmse;
        d["psnr_db"] = r.psnr_db;
        d["sam_degrees"] = r.sam_degrees;
        d["ergas"] = r.ergas;
        d["rase"] = r.rase;
        d["qave"] = r.qave;
        d["mssim"] = r.mssim;
        d["fcc"] = r.fcc;
        d["scale"] = r.scale;
        d["peak"] = r.peak;
        return d;
      },
      py::arg("test"), py::arg("reference"), py::arg("pan") = std::nullopt,
      py::arg("scale") = 4, py::arg("peak") = 255.0,
      "Quality scores of `test` against the ground truth `reference`.");

  mod.def(
      "simulate",
      [](const py::array& gt, int scale, const std::optional<std::vector<double>>& weights,
         const std::optional<std::vector<double>>& shift) {
        MultiBandImage g = to_image(gt, "gt");
        std::optional<TransformParams> theta;
        if (shift) theta = params_from("translation", *shift);
        SimulatedPair pair =
            simulate(g, scale, weights ? *weights : uniform_weights(g.bands), theta);
        return py::make_tuple(to_array(pair.ms), to_array(pair.pan));
      },
      py::arg("gt"), py::arg("scale"), py::arg("weights") = std::nullopt,
      py::arg("shift") = std::nullopt,
      "Derive the observation pair (low-resolution, pan) from a ground truth image.");

  mod.def(
      "make_test_scene",
      [](int rows, int cols, int bands, std::uint64_t seed, int rectangles, int blobs,
         double tint_lo, double tint_hi) {
        SceneConfig cfg;
        cfg.rows = rows;
        cfg.cols = cols;
        cfg.bands = bands;
        cfg.rectangles = rectangles;
        cfg.blobs = blobs;
        cfg.tint_lo = tint_lo;
        cfg.tint_hi = tint_hi;
        return to_array(make_test_scene(cfg, seed));
      },
      py::arg("rows"), py::arg("cols"), py::arg("bands") = 4, py::arg("seed") = 0,
      py::arg("rectangles") = 24, py::arg("blobs") = 4, py::arg("tint_lo") = 0.6,
      py::arg("tint_hi") = 1.4, "Seeded piecewise-constant test scene.");

  mod.def(
      "objective",
      [](const py::array& x, const py::array& ms, const py::array& pan, double lam,
         const std::string& kind, const std::vector<double>& theta) {
        return sirf_objective(to_image(x, "x"), params_from(kind, theta), to_image(ms, "ms"),
                              to_image(pan, "pan"), lam);
      },
      py::arg("x"), py::arg("ms"), py::arg("pan"), py::arg("lam"),
      py::arg("kind") = "translation", py::arg("theta") = std::vector<double>{},
      "Exact fusion objective value at x.");

  mod.def(
      "translation_energy",
      [](const py::array& x, const py::array& pan, double tx, double ty, double epsilon) {
        TransformParams t = TransformParams::identity(TransformKind::Translation);
        t.theta[0] = tx;
        t.theta[1] = ty;
        return dgs_energy(to_image(x, "x"), to_image(pan, "pan"), t, epsilon).normalized();
      },
      py::arg("x"), py::arg("pan"), py::arg("tx"), py::arg("ty"),
      py::arg("epsilon") = 1e-10,
      "Normalized gradient-similarity energy at an explicit translation.");

  mod.def(
      "downsample",
      [](const py::array& x, int factor) { return to_array(downsample(to_image(x, "x"), factor)); },
      py::arg("x"), py::arg("factor"));
  mod.def(
      "upsample",
      [](const py::array& x, int factor) { return to_array(upsample(to_image(x, "x"), factor)); },
      py::arg("x"), py::arg("factor"));

  mod.def(
      "load", [](const std::string& path) { return to_array(load_image(path)); },
      py::arg("path"), "Load MBF1, PNG or TIFF into a float64 array.");
  mod.def(
      "save",
      [](const py::array& x, const std::string& path, int bit_depth) {
        save_image(to_image(x, "x"), path, bit_depth);
      },
      py::arg("x"), py::arg("path"), py::arg("bit_depth") = 8,
      "Save by extension (.mbf1 raw float, .png/.tif quantized).");

  mod.def("set_reference_mode", &set_reference_mode, py::arg("on"));
  mod.def("set_thread_count", &set_thread_count, py::arg("n"));
}
