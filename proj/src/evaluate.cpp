#include "pef/evaluate.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"

#include <algorithm>
#include <cmath>

namespace pef {

EvalReport evaluate_model(const MeasurementSet& set, const Predictor& predictor)
{
    if (set.records.empty()) {
        throw DataError("cannot evaluate on an empty measurement set");
    }
    EvalReport report;
    report.residuals.reserve(set.size());
    double sq = 0.0;
    double abs_sum = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& rec = set.records[k];
        double predicted = 0.0;
        try {
            predicted = predictor(rec.rx);
        } catch (const Error& e) {
            throw DataError("prediction failed for record " + std::to_string(k + 1) + ": " + e.what());
        }
        if (!std::isfinite(predicted)) {
            throw NumericalError("non-finite prediction for record " + std::to_string(k + 1));
        }
        const double r = rec.pathloss - predicted;
        report.residuals.push_back(r);
        sq += r * r;
        abs_sum += std::abs(r);
    }
    const auto K = static_cast<double>(set.size());
    report.rmse = std::sqrt(sq / K);
    report.mean_abs_error = abs_sum / K;

    std::vector<double> abs_err;
    abs_err.reserve(report.residuals.size());
    for (double r : report.residuals) {
        abs_err.push_back(std::abs(r));
    }
    std::sort(abs_err.begin(), abs_err.end());
    report.error_cdf.reserve(abs_err.size());
    for (std::size_t i = 0; i < abs_err.size(); ++i) {
        report.error_cdf.push_back({abs_err[i], static_cast<double>(i + 1) / K});
    }
    return report;
}

ModelComparison compare_models(const MeasurementSet& set, const RegionGrid& grid, const PefParams& pef_params,
                               const LogDistParams& logdist_params, double d0)
{
    ModelComparison cmp;
    cmp.pef = evaluate_model(set, [&](Point rx) { return predict_pef(grid, set.tx, rx, d0, pef_params); });
    cmp.logdist = evaluate_model(set, [&](Point rx) { return predict_logdist(distance(set.tx, rx), logdist_params); });
    cmp.rmse_delta = cmp.logdist.rmse - cmp.pef.rmse;
    if (std::abs(cmp.rmse_delta) <= kTieTolerance) {
        cmp.winner = Winner::Tie;
    } else {
        cmp.winner = cmp.rmse_delta > 0.0 ? Winner::Pef : Winner::LogDistance;
    }
    return cmp;
}

std::string cdf_csv(const EvalReport& report)
{
    std::string out = "abs_error_db,fraction\n";
    for (const auto& p : report.error_cdf) {
        out += text::round_trip(p.abs_error) + "," + text::round_trip(p.fraction) + "\n";
    }
    return out;
}

std::string winner_name(Winner w)
{
    switch (w) {
    case Winner::Pef:
        return "pef";
    case Winner::LogDistance:
        return "log-distance";
    case Winner::Tie:
        break;
    }
    return "tie";
}

} // namespace pef
