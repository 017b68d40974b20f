#include "pef/cli.hpp"
#include "pef/dataset.hpp"
#include "pef/error.hpp"
#include "pef/evaluate.hpp"
#include "pef/inference.hpp"
#include "pef/params_io.hpp"
#include "pef/pathtrace.hpp"
#include "pef/propagation.hpp"
#include "pef/raster.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace pef;

namespace {

using XY = std::array<double, 2>;

Point pt(const XY& p) { return {p[0], p[1]}; }
XY xy(const Point& p) { return {p.x, p.y}; }

py::array_t<std::uint8_t> labels_array(const RegionGrid& g)
{
    py::array_t<std::uint8_t> a({g.height, g.width});
    std::copy(g.labels.begin(), g.labels.end(), a.mutable_data());
    return a;
}

RegionGrid grid_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> labels,
                           double meters_per_pixel, int type_count, std::vector<std::string> names)
{
    if (labels.ndim() != 2) {
        throw DataError("labels must be a 2-D array");
    }
    RegionGrid g;
    g.height = static_cast<int>(labels.shape(0));
    g.width = static_cast<int>(labels.shape(1));
    g.meters_per_pixel = meters_per_pixel;
    g.labels.assign(labels.data(), labels.data() + labels.size());
    if (type_count <= 0) {
        type_count = g.labels.empty() ? 0 : *std::max_element(g.labels.begin(), g.labels.end()) + 1;
    }
    g.type_count = type_count;
    g.type_names = std::move(names);
    g.validate();
    return g;
}

RgbRaster raster_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> img)
{
    if (img.ndim() != 3 || img.shape(2) != 3) {
        throw DataError("raster must be an (height, width, 3) uint8 array");
    }
    RgbRaster r;
    r.height = static_cast<int>(img.shape(0));
    r.width = static_cast<int>(img.shape(1));
    r.pixels.resize(static_cast<std::size_t>(r.width) * r.height);
    const auto* p = img.data();
    for (auto& px : r.pixels) {
        px = {p[0], p[1], p[2]};
        p += 3;
    }
    r.validate();
    return r;
}

py::array_t<std::uint8_t> raster_array(const RgbRaster& r)
{
    py::array_t<std::uint8_t> a({r.height, r.width, 3});
    auto* p = a.mutable_data();
    for (const auto& px : r.pixels) {
        *p++ = px[0];
        *p++ = px[1];
        *p++ = px[2];
    }
    return a;
}

DesignMatrix design_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> coeffs,
                                py::array_t<double, py::array::c_style | py::array::forcecast> observed,
                                double truncation)
{
    if (coeffs.ndim() != 2 || observed.ndim() != 1 || coeffs.shape(0) != observed.shape(0)) {
        throw DataError("coefficients must be (K, I) and observations (K,)");
    }
    const auto K = static_cast<std::size_t>(coeffs.shape(0));
    const auto I = static_cast<std::size_t>(coeffs.shape(1));
    DesignMatrix d(static_cast<int>(I), truncation);
    for (std::size_t k = 0; k < K; ++k) {
        d.add_row(std::span<const double>(coeffs.data() + k * I, I), observed.data()[k]);
    }
    return d;
}

std::vector<DistanceSample> samples_from(const std::vector<double>& distances, const std::vector<double>& pathloss)
{
    if (distances.size() != pathloss.size()) {
        throw DataError("distances and path losses differ in length");
    }
    std::vector<DistanceSample> out;
    for (std::size_t k = 0; k < distances.size(); ++k) {
        out.push_back({distances[k], pathloss[k]});
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_pef, m)
{
    m.doc() = "Multi-exponent environmental path loss model";

    auto base = py::register_exception<Error>(m, "PefError", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());

    py::class_<RegionGrid>(m, "RegionGrid")
        .def(py::init(&grid_from_array), py::arg("labels"), py::arg("meters_per_pixel"), py::arg("type_count") = 0,
             py::arg("type_names") = std::vector<std::string>{})
        .def_readonly("width", &RegionGrid::width)
        .def_readonly("height", &RegionGrid::height)
        .def_readonly("meters_per_pixel", &RegionGrid::meters_per_pixel)
        .def_readonly("type_count", &RegionGrid::type_count)
        .def_readwrite("type_names", &RegionGrid::type_names)
        .def_property_readonly("type_colors", [](const RegionGrid& g) { return g.type_colors; })
        .def_property_readonly("labels", &labels_array)
        .def("__eq__", [](const RegionGrid& a, const RegionGrid& b) { return a == b; })
        .def("__repr__", [](const RegionGrid& g) {
            std::ostringstream s;
            s << "RegionGrid(" << g.width << "x" << g.height << ", " << g.meters_per_pixel << " m/px, "
              << g.type_count << " types)";
            return s.str();
        });

    m.def("load_raster", [](const std::filesystem::path& p) { return raster_array(load_raster(p)); }, py::arg("path"));
    m.def("save_raster",
          [](py::array_t<std::uint8_t> img, const std::filesystem::path& p, bool ascii) {
              save_raster(raster_from_array(img), p, ascii);
          },
          py::arg("image"), py::arg("path"), py::arg("ascii") = false);
    m.def("classify_regions",
          [](py::array_t<std::uint8_t> img, int k, std::uint64_t seed, double mpp) {
              return classify_regions(raster_from_array(img), k, seed, mpp);
          },
          py::arg("image"), py::arg("k"), py::arg("seed"), py::arg("meters_per_pixel"));
    m.def("merge_region_types", &merge_region_types, py::arg("grid"), py::arg("merges"));
    m.def("load_region_grid", &load_region_grid, py::arg("path"));
    m.def("save_region_grid", &save_region_grid, py::arg("grid"), py::arg("path"), py::arg("ascii") = false);

    m.def("trace_path",
          [](const RegionGrid& g, XY tx, XY rx, double d0) {
              std::vector<std::pair<int, double>> out;
              for (const auto& s : trace_path(g, pt(tx), pt(rx), d0).segments) {
                  out.emplace_back(s.type_id, s.length);
              }
              return out;
          },
          py::arg("grid"), py::arg("tx"), py::arg("rx"), py::arg("d0") = 1.0,
          "Ordered (type_id, length_m) segments of the line beyond d0.");
    m.def("like_term_coefficients",
          [](const RegionGrid& g, XY tx, XY rx, double d0) {
              return like_term_coefficients(trace_path(g, pt(tx), pt(rx), d0), g.type_count).coeffs;
          },
          py::arg("grid"), py::arg("tx"), py::arg("rx"), py::arg("d0") = 1.0);

    py::class_<PefParams>(m, "PefParams")
        .def(py::init([](double c, std::vector<double> n, double sigma) { return PefParams{c, std::move(n), sigma}; }),
             py::arg("c"), py::arg("n"), py::arg("sigma"))
        .def_readwrite("c", &PefParams::intercept_c)
        .def_readwrite("n", &PefParams::exponents)
        .def_readwrite("sigma", &PefParams::sigma)
        .def("__repr__", [](const PefParams& p) {
            std::ostringstream s;
            s.precision(17);
            s << "PefParams(c=" << p.intercept_c << ", n=[";
            for (std::size_t i = 0; i < p.exponents.size(); ++i) {
                s << (i ? ", " : "") << p.exponents[i];
            }
            s << "], sigma=" << p.sigma << ")";
            return s.str();
        });

    py::class_<LogDistParams>(m, "LogDistParams")
        .def(py::init([](double c, double n, double sigma, double d0) { return LogDistParams{c, n, sigma, d0}; }),
             py::arg("c"), py::arg("n"), py::arg("sigma"), py::arg("d0") = 1.0)
        .def_readwrite("c", &LogDistParams::intercept_c)
        .def_readwrite("n", &LogDistParams::n)
        .def_readwrite("sigma", &LogDistParams::sigma)
        .def_readwrite("d0", &LogDistParams::d0);

    m.def("predict_pef", [](const RegionGrid& g, XY tx, XY rx, double d0, const PefParams& p) {
        return predict_pef(g, pt(tx), pt(rx), d0, p);
    }, py::arg("grid"), py::arg("tx"), py::arg("rx"), py::arg("d0"), py::arg("params"));
    m.def("predict_logdist", &predict_logdist, py::arg("distance"), py::arg("params"));
    m.def("heatmap",
          [](const RegionGrid& g, XY tx, double d0, const PefParams& p, int stride) {
              const auto h = heatmap(g, pt(tx), d0, p, stride);
              py::array_t<double> a({h.rows, h.cols});
              std::copy(h.values.begin(), h.values.end(), a.mutable_data());
              return a;
          },
          py::arg("grid"), py::arg("tx"), py::arg("d0"), py::arg("params"), py::arg("stride") = 1);

    py::class_<MeasurementSet>(m, "MeasurementSet")
        .def_property_readonly("tx", [](const MeasurementSet& s) { return xy(s.tx); })
        .def_property_readonly("truncation", [](const MeasurementSet& s) { return s.truncation; })
        .def_property_readonly("rx",
                               [](const MeasurementSet& s) {
                                   py::array_t<double> a({static_cast<py::ssize_t>(s.size()), py::ssize_t{2}});
                                   auto* p = a.mutable_data();
                                   for (const auto& r : s.records) {
                                       *p++ = r.rx.x;
                                       *p++ = r.rx.y;
                                   }
                                   return a;
                               })
        .def_property_readonly("pathloss",
                               [](const MeasurementSet& s) {
                                   py::array_t<double> a(static_cast<py::ssize_t>(s.size()));
                                   auto* p = a.mutable_data();
                                   for (const auto& r : s.records) {
                                       *p++ = r.pathloss;
                                   }
                                   return a;
                               })
        .def_property_readonly("distances",
                               [](const MeasurementSet& s) {
                                   std::vector<double> d;
                                   for (const auto& r : s.records) {
                                       d.push_back(distance(s.tx, r.rx));
                                   }
                                   return d;
                               })
        .def("__len__", &MeasurementSet::size);

    m.def("load_measurements", &load_measurements, py::arg("path"));
    m.def("save_measurements", &save_measurements, py::arg("measurements"), py::arg("path"));
    m.def("truncate", &pef::truncate, py::arg("measurements"), py::arg("truncation"));
    m.def("gen_synthetic",
          [](const RegionGrid& g, XY tx, const PefParams& p, double d0, std::size_t count,
             std::optional<double> truncation, std::uint64_t seed) {
              return gen_synthetic(g, pt(tx), p, d0, count, truncation, seed);
          },
          py::arg("grid"), py::arg("tx"), py::arg("params"), py::arg("d0"), py::arg("count"),
          py::arg("truncation") = py::none(), py::arg("seed") = 0);

    py::class_<DesignMatrix>(m, "DesignMatrix")
        .def(py::init(&design_from_arrays), py::arg("coefficients"), py::arg("observed"),
             py::arg("truncation") = std::numeric_limits<double>::infinity())
        .def_property_readonly("type_count", &DesignMatrix::type_count)
        .def_property_readonly("truncation", &DesignMatrix::truncation)
        .def("__len__", &DesignMatrix::size);
    m.def("build_design",
          [](const RegionGrid& g, const MeasurementSet& s, double d0, double truncation) {
              return build_design(g, s, d0, truncation);
          },
          py::arg("grid"), py::arg("measurements"), py::arg("d0"),
          py::arg("truncation") = std::numeric_limits<double>::infinity());

    m.def("normal_hazard", &normal_hazard, py::arg("z"));
    m.def("log_normal_upper_tail", &log_normal_upper_tail, py::arg("z"));
    m.def("truncated_loglik", &truncated_loglik, py::arg("design"), py::arg("params"));
    m.def("loglik_gradient",
          [](const DesignMatrix& d, const PefParams& p) {
              const auto g = loglik_gradient(d, p);
              return py::dict(py::arg("n") = g.exponents, py::arg("c") = g.intercept, py::arg("sigma") = g.sigma);
          },
          py::arg("design"), py::arg("params"), "Gradient of the log-likelihood (ascent direction).");

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init([](double step, int max_iter, double tol, bool fixed) {
                 return FitOptions{step, max_iter, tol, fixed};
             }),
             py::arg("initial_step") = 1e-3, py::arg("max_iterations") = 100000,
             py::arg("gradient_tolerance") = 1e-6, py::arg("fixed_step") = false)
        .def_readwrite("initial_step", &FitOptions::initial_step)
        .def_readwrite("max_iterations", &FitOptions::max_iterations)
        .def_readwrite("gradient_tolerance", &FitOptions::gradient_tolerance)
        .def_readwrite("fixed_step", &FitOptions::fixed_step);

    py::class_<FitReport>(m, "FitReport")
        .def_readonly("params", &FitReport::params)
        .def_readonly("log_likelihood", &FitReport::log_likelihood)
        .def_readonly("iterations", &FitReport::iterations)
        .def_readonly("converged", &FitReport::converged)
        .def_readonly("final_gradient_norm", &FitReport::final_gradient_norm)
        .def_readonly("rmse_in_sample", &FitReport::rmse_in_sample);

    m.def("fit_ml",
          [](const DesignMatrix& d, std::optional<PefParams> init, const FitOptions& o) {
              return init ? fit_ml(d, *init, o) : fit_ml(d, o);
          },
          py::arg("design"), py::arg("init") = py::none(), py::arg("options") = FitOptions{});
    m.def("ls_fit_logdist",
          [](const std::vector<double>& d, const std::vector<double>& l, double d0) {
              return ls_fit_logdist(samples_from(d, l), d0);
          },
          py::arg("distances"), py::arg("pathloss"), py::arg("d0") = 1.0);
    m.def("fit_ml_logdist",
          [](const std::vector<double>& d, const std::vector<double>& l, double d0, double truncation,
             const FitOptions& o) {
              const auto r = fit_ml_logdist(samples_from(d, l), d0, truncation, nullptr, o);
              return py::make_tuple(to_logdist(r.params, d0), r);
          },
          py::arg("distances"), py::arg("pathloss"), py::arg("d0") = 1.0,
          py::arg("truncation") = std::numeric_limits<double>::infinity(), py::arg("options") = FitOptions{});

    m.def("compare_models",
          [](const MeasurementSet& s, const RegionGrid& g, const PefParams& pef, const LogDistParams& ld, double d0) {
              const auto c = compare_models(s, g, pef, ld, d0);
              return py::dict(py::arg("rmse_pef") = c.pef.rmse, py::arg("rmse_logdist") = c.logdist.rmse,
                              py::arg("mae_pef") = c.pef.mean_abs_error,
                              py::arg("mae_logdist") = c.logdist.mean_abs_error,
                              py::arg("rmse_delta") = c.rmse_delta, py::arg("winner") = winner_name(c.winner));
          },
          py::arg("measurements"), py::arg("grid"), py::arg("pef"), py::arg("logdist"), py::arg("d0") = 1.0);

    m.def("params_json",
          [](const PefParams& p, std::optional<double> d0, std::vector<std::string> names) {
              return params_json(p, d0, names);
          },
          py::arg("params"), py::arg("d0") = py::none(), py::arg("type_names") = std::vector<std::string>{});
    m.def("load_params",
          [](const std::filesystem::path& p) {
              auto f = load_params(p);
              return py::make_tuple(f.params, f.d0, f.type_names);
          },
          py::arg("path"));

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::ostringstream out;
              std::ostringstream err;
              const int code = cli::run(args, out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Run the pef command line in-process; returns (exit_code, stdout, stderr).");
}
