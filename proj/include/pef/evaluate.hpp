#pragma once

#include "pef/dataset.hpp"
#include "pef/propagation.hpp"
#include "pef/raster.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pef {

struct CdfPoint {
    double abs_error = 0.0;  // dB
    double fraction = 0.0;
};

/// Residuals are observed - predicted.
struct EvalReport {
    double rmse = 0.0;
    double mean_abs_error = 0.0;
    std::vector<CdfPoint> error_cdf;
    std::vector<double> residuals;
};

using Predictor = std::function<double(Point rx)>;

EvalReport evaluate_model(const MeasurementSet& set, const Predictor& predictor);

enum class Winner { Pef, LogDistance, Tie };

struct ModelComparison {
    EvalReport pef;
    EvalReport logdist;
    /// rmse(log-distance) - rmse(PEF); positive when the PEF model is better.
    double rmse_delta = 0.0;
    Winner winner = Winner::Tie;
};

/// RMSE differences within this many dB count as a tie.
inline constexpr double kTieTolerance = 1e-9;

ModelComparison compare_models(const MeasurementSet& set, const RegionGrid& grid, const PefParams& pef_params,
                               const LogDistParams& logdist_params, double d0);

std::string cdf_csv(const EvalReport& report);
std::string winner_name(Winner w);

} // namespace pef
