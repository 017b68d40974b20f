#include "pef/cli.hpp"

#include "pef/dataset.hpp"
#include "pef/error.hpp"
#include "pef/evaluate.hpp"
#include "pef/inference.hpp"
#include "pef/params_io.hpp"
#include "pef/pathtrace.hpp"
#include "pef/propagation.hpp"
#include "pef/raster.hpp"
#include "pef/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>

namespace pef::cli {
namespace {

constexpr double kDefaultD0 = 1.0;
constexpr double kDefaultTruncation = 140.0;

Point parse_point(const std::string& s, const char* what)
{
    auto [x, y] = text::parse_pair(s, what);
    return {x, y};
}

std::map<int, int> parse_merges(const std::string& spec)
{
    std::map<int, int> merges;
    for (const auto& item : text::split(spec, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--merge expects a=b pairs, got '" + item + "'");
        }
        const auto from = static_cast<int>(text::parse_int(item.substr(0, eq), "--merge"));
        const auto to = static_cast<int>(text::parse_int(item.substr(eq + 1), "--merge"));
        merges[from] = to;
    }
    return merges;
}

std::string type_label(const RegionGrid& grid, const std::vector<std::string>& names, int t)
{
    if (static_cast<std::size_t>(t) < names.size()) {
        return names[static_cast<std::size_t>(t)];
    }
    if (static_cast<std::size_t>(t) < grid.type_names.size()) {
        return grid.type_names[static_cast<std::size_t>(t)];
    }
    return "Region type " + std::to_string(t);
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s + " ";
}

std::string parameter_table(const PefParams& p, const std::vector<std::string>& labels)
{
    std::string out = pad("Environmental Factor", 24) + pad("Variable", 9) + "Value\n";
    out += pad("Intercept", 24) + pad("C", 9) + text::fixed(p.intercept_c) + "\n";
    for (std::size_t i = 0; i < p.exponents.size(); ++i) {
        out += pad(labels[i], 24) + pad("n_" + std::to_string(i + 1), 9) + text::fixed(p.exponents[i]) + "\n";
    }
    out += pad("Standard Deviation", 24) + pad("sigma", 9) + text::fixed(p.sigma) + "\n";
    return out;
}

std::string fit_summary(const FitReport& r)
{
    std::string out;
    out += "log-likelihood: " + text::fixed(r.log_likelihood, 4) + "\n";
    out += "iterations: " + std::to_string(r.iterations) + "\n";
    out += std::string("converged: ") + (r.converged ? "yes" : "no") + "\n";
    out += "final gradient norm: " + text::fixed(r.final_gradient_norm, 6) + "\n";
    out += "in-sample RMSE: " + text::fixed(r.rmse_in_sample) + " dB\n";
    return out;
}

FitOptions optimizer_options(double step, int max_iter, double tol, bool fixed_step)
{
    FitOptions o;
    o.initial_step = step;
    o.max_iterations = max_iter;
    o.gradient_tolerance = tol;
    o.fixed_step = fixed_step;
    return o;
}

struct Options {
    // shared
    std::string grid, params, meas, out, report, cdf, cdf_logdist, pgm, init, in, merge, names, pef, logdist;
    std::string tx, rx;
    double d0 = kDefaultD0;
    double truncation = kDefaultTruncation;
    bool no_trunc = false;
    bool ls_only = false;
    bool fixed_step = false;
    std::uint64_t seed = 0;
    int k = 0;
    std::size_t count = 0;
    int stride = 1;
    double mpp = 0.0;
    double step = 1e-3;
    int max_iter = 100000;
    double tol = 1e-6;
};

// Applies `key: value` entries from --config for options not given on the
// command line. Keys unknown to the selected subcommand are ignored so one
// file can drive a whole pipeline.
std::vector<std::string> apply_config(CLI::App& app, std::vector<std::string> args)
{
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        }
    }
    if (!config_path) {
        return args;
    }
    CLI::App* sub = nullptr;
    for (const auto& a : args) {
        if (a.empty() || a[0] == '-') {
            continue;
        }
        sub = app.get_subcommand_no_throw(a);
        if (sub) {
            break;
        }
    }
    if (sub == nullptr) {
        return args;
    }
    auto kv = text::KeyValue::load(*config_path);
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : kv.entries()) {
        const std::string flag = "--" + key;
        bool known_anywhere = false;
        for (auto* s : app.get_subcommands({})) {
            known_anywhere = known_anywhere || s->get_option_no_throw(flag) != nullptr;
        }
        if (!known_anywhere) {
            throw UsageError(*config_path + ": unknown config key '" + key + "'");
        }
        auto* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr || given(flag)) {
            continue;
        }
        if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "yes" || value == "1") {
                extra.push_back(flag);
            }
            continue;
        }
        extra.push_back(flag);
        extra.push_back(value);
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

int fail(std::ostream& err, Error::Kind kind, const std::string& message)
{
    const char* name = kind == Error::Kind::Usage ? "usage" : kind == Error::Kind::Data ? "data" : "numerical";
    std::string line = message;
    std::replace(line.begin(), line.end(), '\n', ' ');
    err << "pef: error[" << name << "]: " << line << "\n";
    return static_cast<int>(kind);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multi-exponent environmental path loss model: region classification, path tracing, "
                 "prediction, truncated maximum-likelihood fitting and evaluation.",
                 "pef"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config;
    app.add_option("--config", config, "key: value file supplying defaults for any option; flags win");

    Options o;

    auto* classify = app.add_subcommand("classify", "k-means region classification of an RGB raster map");
    classify->add_option("--in", o.in, "input portable pixmap (P6/P3)")->required();
    classify->add_option("--k", o.k, "number of region types")->required();
    classify->add_option("--seed", o.seed, "k-means++ seed")->required();
    classify->add_option("--mpp", o.mpp, "meters per pixel")->required();
    classify->add_option("--out", o.out, "output label graymap (sidecar written to <out>.meta)")->required();
    classify->add_option("--merge", o.merge, "fold region types together, e.g. 3=1,4=2");
    classify->add_option("--names", o.names, "comma-separated names for the final region types");

    auto* trace = app.add_subcommand("trace", "path matrix of the Tx-Rx line");
    trace->add_option("--grid", o.grid, "region grid graymap")->required();
    trace->add_option("--tx", o.tx, "transmitter x,y in meters")->required();
    trace->add_option("--rx", o.rx, "receiver x,y in meters")->required();
    trace->add_option("--d0", o.d0, "close-in distance in meters");
    trace->add_option("--out", o.out, "write to a file instead of stdout");

    auto* predict = app.add_subcommand("predict", "mean PEF path loss between two points");
    predict->add_option("--grid", o.grid, "region grid graymap")->required();
    predict->add_option("--params", o.params, "PEF parameter file")->required();
    predict->add_option("--tx", o.tx, "transmitter x,y in meters")->required();
    predict->add_option("--rx", o.rx, "receiver x,y in meters")->required();
    predict->add_option("--d0", o.d0, "close-in distance in meters");

    auto* heat = app.add_subcommand("heatmap", "mean path-loss map for one transmitter");
    heat->add_option("--grid", o.grid, "region grid graymap")->required();
    heat->add_option("--params", o.params, "PEF parameter file")->required();
    heat->add_option("--tx", o.tx, "transmitter x,y in meters")->required();
    heat->add_option("--out", o.out, "CSV of dB values")->required();
    heat->add_option("--pgm", o.pgm, "min-max normalized graymap rendering");
    heat->add_option("--stride", o.stride, "evaluate every stride-th cell");
    heat->add_option("--d0", o.d0, "close-in distance in meters");

    auto* gen = app.add_subcommand("gen-synth", "synthetic measurements from a parameter file");
    gen->add_option("--grid", o.grid, "region grid graymap")->required();
    gen->add_option("--params", o.params, "PEF parameter file")->required();
    gen->add_option("--tx", o.tx, "transmitter x,y in meters")->required();
    gen->add_option("--d0", o.d0, "close-in distance in meters");
    gen->add_option("--k", o.count, "number of records")->required();
    gen->add_option("--L", o.truncation, "truncation level in dB (omit for untruncated data)");
    gen->add_option("--seed", o.seed, "generator seed")->required();
    gen->add_option("--out", o.out, "measurement CSV")->required();

    auto* fit = app.add_subcommand("fit", "truncated maximum-likelihood fit of the PEF model");
    fit->add_option("--grid", o.grid, "region grid graymap")->required();
    fit->add_option("--meas", o.meas, "measurement CSV")->required();
    fit->add_option("--d0", o.d0, "close-in distance in meters");
    fit->add_option("--L", o.truncation, "truncation level in dB");
    fit->add_flag("--no-trunc", o.no_trunc, "treat data as untruncated");
    fit->add_option("--init", o.init, "starting parameter file (default: least-squares start)");
    fit->add_option("--step", o.step, "initial step size");
    fit->add_option("--max-iter", o.max_iter, "iteration cap");
    fit->add_option("--tol", o.tol, "gradient tolerance per data point");
    fit->add_flag("--fixed-step", o.fixed_step, "constant step, no backtracking");
    fit->add_option("--out", o.out, "fitted parameter file")->required();
    fit->add_option("--report", o.report, "text report");

    auto* fitld = app.add_subcommand("fit-logdist", "least-squares and truncated-ML log-distance fit");
    fitld->add_option("--meas", o.meas, "measurement CSV")->required();
    fitld->add_option("--d0", o.d0, "close-in distance in meters");
    fitld->add_option("--L", o.truncation, "truncation level in dB");
    fitld->add_flag("--no-trunc", o.no_trunc, "treat data as untruncated");
    fitld->add_flag("--ls-only", o.ls_only, "least squares only");
    fitld->add_option("--step", o.step, "initial step size");
    fitld->add_option("--max-iter", o.max_iter, "iteration cap");
    fitld->add_option("--tol", o.tol, "gradient tolerance per data point");
    fitld->add_flag("--fixed-step", o.fixed_step, "constant step, no backtracking");
    fitld->add_option("--out", o.out, "fitted parameter file");
    fitld->add_option("--report", o.report, "text report");

    auto* eval = app.add_subcommand("evaluate", "RMSE and error CDF of the PEF and log-distance models");
    eval->add_option("--grid", o.grid, "region grid graymap")->required();
    eval->add_option("--meas", o.meas, "measurement CSV")->required();
    eval->add_option("--pef", o.pef, "PEF parameter file")->required();
    eval->add_option("--logdist", o.logdist, "log-distance parameter file")->required();
    eval->add_option("--d0", o.d0, "close-in distance in meters");
    eval->add_option("--out", o.out, "text report (default stdout)");
    eval->add_option("--cdf", o.cdf, "CDF of PEF absolute errors");
    eval->add_option("--cdf-logdist", o.cdf_logdist, "CDF of log-distance absolute errors");

    try {
        auto full = apply_config(app, args);
        std::reverse(full.begin(), full.end());
        app.parse(full);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(err, Error::Kind::Usage, e.what());
    } catch (const Error& e) {
        return fail(err, e.kind(), e.what());
    }

    auto d0_given = [](CLI::App* sub) { return sub->get_option("--d0")->count() > 0; };

    try {
        if (*classify) {
            auto raster = load_raster(o.in);
            auto grid = classify_regions(raster, o.k, o.seed, o.mpp);
            if (!o.merge.empty()) {
                grid = merge_region_types(grid, parse_merges(o.merge));
            }
            if (!o.names.empty()) {
                auto names = text::split(o.names, ',');
                if (names.size() != static_cast<std::size_t>(grid.type_count)) {
                    throw UsageError("--names lists " + std::to_string(names.size()) + " names for " +
                                     std::to_string(grid.type_count) + " region types");
                }
                grid.type_names = names;
            }
            save_region_grid(grid, o.out);
            out << "region types: " << grid.type_count << "\n";
            for (int t = 0; t < grid.type_count; ++t) {
                const auto& c = grid.type_colors[static_cast<std::size_t>(t)];
                const auto pixels = std::count(grid.labels.begin(), grid.labels.end(), t);
                out << t << ": rgb(" << int(c[0]) << "," << int(c[1]) << "," << int(c[2]) << ") pixels " << pixels
                    << "\n";
            }
        } else if (*trace) {
            auto grid = load_region_grid(o.grid);
            auto path = trace_path(grid, parse_point(o.tx, "--tx"), parse_point(o.rx, "--rx"), o.d0);
            std::string text_out = "d0,total\n" + text::round_trip(path.d0) + "," +
                                   text::round_trip(path.total_distance) + "\ntype_id,length_m\n";
            for (const auto& s : path.segments) {
                text_out += std::to_string(s.type_id) + "," + text::round_trip(s.length) + "\n";
            }
            if (o.out.empty()) {
                out << text_out;
            } else {
                text::write_file(o.out, text_out);
            }
        } else if (*predict) {
            auto grid = load_region_grid(o.grid);
            auto file = load_params(o.params);
            const double d0 = d0_given(predict) ? o.d0 : file.d0.value_or(kDefaultD0);
            out << text::fixed(predict_pef(grid, parse_point(o.tx, "--tx"), parse_point(o.rx, "--rx"), d0,
                                           file.params))
                << "\n";
        } else if (*heat) {
            auto grid = load_region_grid(o.grid);
            auto file = load_params(o.params);
            const double d0 = d0_given(heat) ? o.d0 : file.d0.value_or(kDefaultD0);
            auto map = heatmap(grid, parse_point(o.tx, "--tx"), d0, file.params, o.stride);
            text::write_file(o.out, heatmap_csv(map));
            if (!o.pgm.empty()) {
                save_heatmap_pgm(map, o.pgm);
            }
            out << "heatmap: " << map.rows << " x " << map.cols << "\n";
        } else if (*gen) {
            auto grid = load_region_grid(o.grid);
            auto file = load_params(o.params);
            const double d0 = d0_given(gen) ? o.d0 : file.d0.value_or(kDefaultD0);
            std::optional<double> truncation;
            if (gen->get_option("--L")->count() > 0) {
                truncation = o.truncation;
            }
            auto set = gen_synthetic(grid, parse_point(o.tx, "--tx"), file.params, d0, o.count, truncation, o.seed);
            save_measurements(set, o.out);
            out << "records: " << set.size() << "\n";
        } else if (*fit) {
            auto grid = load_region_grid(o.grid);
            auto set = load_measurements(o.meas);
            const double truncation = o.no_trunc ? std::numeric_limits<double>::infinity() : o.truncation;
            std::size_t dropped = 0;
            auto design = build_design(grid, set, o.d0, truncation, &dropped);
            if (design.size() == 0) {
                throw DataError("no records below the truncation level " + text::fixed(truncation) + " dB");
            }
            const auto options = optimizer_options(o.step, o.max_iter, o.tol, o.fixed_step);
            FitReport report;
            if (o.init.empty()) {
                report = fit_ml(design, options);
            } else {
                report = fit_ml(design, load_params(o.init).params, options);
            }
            std::vector<std::string> labels;
            for (int t = 0; t < grid.type_count; ++t) {
                labels.push_back(type_label(grid, {}, t));
            }
            text::write_file(o.out, params_json(report.params, o.d0, grid.type_names));
            std::string txt = "PEF maximum-likelihood fit\n";
            txt += "records: " + std::to_string(design.size()) + " (dropped at truncation: " +
                   std::to_string(dropped) + ")\n";
            txt += "truncation L: " + (design.truncated() ? text::fixed(truncation) + " dB" : std::string("none")) +
                   "\n";
            txt += "d0: " + text::round_trip(o.d0) + " m\n\n";
            txt += parameter_table(report.params, labels) + "\n" + fit_summary(report);
            if (!o.report.empty()) {
                text::write_file(o.report, txt);
            }
            out << txt;
            if (!report.converged) {
                err << "pef: warning: optimizer stopped before reaching the gradient tolerance\n";
            }
        } else if (*fitld) {
            auto set = load_measurements(o.meas);
            const double truncation = o.no_trunc ? std::numeric_limits<double>::infinity() : o.truncation;
            if (!o.no_trunc) {
                const auto before = set.size();
                set = truncate(set, truncation);
                if (set.size() < before) {
                    err << "pef: note: " << (before - set.size()) << " records at or above L dropped\n";
                }
            }
            auto samples = distance_samples(set);
            auto ls = ls_fit_logdist(samples, o.d0);
            std::string txt = "log-distance fit\nrecords: " + std::to_string(samples.size()) + "\n";
            txt += "truncation L: " + (o.no_trunc ? std::string("none") : text::fixed(truncation) + " dB") + "\n";
            txt += "d0: " + text::round_trip(o.d0) + " m\n\n";
            txt += pad("Method", 6) + pad("C", 8) + pad("n", 6) + "sigma\n";
            txt += pad("LS", 6) + pad(text::fixed(ls.intercept_c), 8) + pad(text::fixed(ls.n), 6) +
                   text::fixed(ls.sigma) + "\n";
            LogDistParams chosen = ls;
            if (!o.ls_only) {
                const auto options = optimizer_options(o.step, o.max_iter, o.tol, o.fixed_step);
                auto ml = fit_ml_logdist(samples, o.d0, truncation, &ls, options);
                chosen = to_logdist(ml.params, o.d0);
                txt += pad("ML", 6) + pad(text::fixed(chosen.intercept_c), 8) + pad(text::fixed(chosen.n), 6) +
                       text::fixed(chosen.sigma) + "\n\n" + fit_summary(ml);
            }
            if (!o.out.empty()) {
                text::write_file(o.out, logdist_json(chosen));
            }
            if (!o.report.empty()) {
                text::write_file(o.report, txt);
            }
            out << txt;
        } else if (*eval) {
            auto grid = load_region_grid(o.grid);
            auto set = load_measurements(o.meas);
            auto pef_file = load_params(o.pef);
            const double d0 = d0_given(eval) ? o.d0 : pef_file.d0.value_or(kDefaultD0);
            auto ld = load_logdist_params(o.logdist, d0_given(eval) ? std::optional<double>(o.d0) : std::nullopt);
            auto cmp = compare_models(set, grid, pef_file.params, ld, d0);
            std::string txt = "records: " + std::to_string(set.size()) + "\n";
            txt += pad("model", 13) + pad("rmse_db", 8) + "mean_abs_error_db\n";
            txt += pad("pef", 13) + pad(text::fixed(cmp.pef.rmse), 8) + text::fixed(cmp.pef.mean_abs_error) + "\n";
            txt += pad("log-distance", 13) + pad(text::fixed(cmp.logdist.rmse), 8) +
                   text::fixed(cmp.logdist.mean_abs_error) + "\n";
            txt += "delta_rmse_db: " + text::fixed(cmp.rmse_delta) + "\n";
            txt += "winner: " + winner_name(cmp.winner) + "\n";
            if (o.out.empty()) {
                out << txt;
            } else {
                text::write_file(o.out, txt);
            }
            if (!o.cdf.empty()) {
                text::write_file(o.cdf, cdf_csv(cmp.pef));
            }
            if (!o.cdf_logdist.empty()) {
                text::write_file(o.cdf_logdist, cdf_csv(cmp.logdist));
            }
        }
    } catch (const Error& e) {
        return fail(err, e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(err, Error::Kind::Data, e.what());
    }
    return 0;
}

} // namespace pef::cli
