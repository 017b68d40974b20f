#pragma once

#include "pef/pathtrace.hpp"
#include "pef/propagation.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pef {

/// exp(-z^2/2) / integral_z^inf exp(-t^2/2) dt, i.e. phi(z) / (1 - Phi(z)).
///
/// Uses erfc for z < 8 and the Laplace continued fraction of the Mills ratio
/// above, so neither branch overflows or underflows for |z| <= 1e6. For very
/// negative z the result underflows to 0.
double normal_hazard(double z);

/// log(1 - Phi(z)) without cancellation or underflow.
double log_normal_upper_tail(double z);

/// Observed path losses with their per-type coefficients, all below the
/// truncation level L. L may be +inf for untruncated data.
class DesignMatrix {
public:
    explicit DesignMatrix(int type_count, double truncation = std::numeric_limits<double>::infinity());

    /// Throws DataError if `observed` is not below the truncation level.
    void add_row(std::span<const double> coeffs, double observed);

    int type_count() const { return type_count_; }
    std::size_t size() const { return observed_.size(); }
    double truncation() const { return truncation_; }
    bool truncated() const { return std::isfinite(truncation_); }

    std::span<const double> coeffs(std::size_t k) const
    {
        return {coeffs_.data() + k * static_cast<std::size_t>(type_count_), static_cast<std::size_t>(type_count_)};
    }
    double observed(std::size_t k) const { return observed_[k]; }

    /// K >= I + 2 so that every exponent, C and sigma are identifiable.
    void require_identifiable() const;

private:
    int type_count_;
    double truncation_;
    std::vector<double> coeffs_;
    std::vector<double> observed_;
};

/// Gradient of the truncated log-likelihood, in the ascent direction.
struct LoglikGradient {
    std::vector<double> exponents;
    double intercept = 0.0;
    double sigma = 0.0;

    /// (n_1..n_I, C, sigma)
    std::vector<double> flat() const;
    double max_abs() const;
};

double truncated_loglik(const DesignMatrix& design, const PefParams& params);
LoglikGradient loglik_gradient(const DesignMatrix& design, const PefParams& params);

struct FitOptions {
    double initial_step = 1e-3;
    int max_iterations = 100000;
    /// Convergence when the gradient infinity-norm drops below this times K.
    double gradient_tolerance = 1e-6;
    /// Keep the step constant and accept every move instead of backtracking.
    bool fixed_step = false;
};

struct FitReport {
    PefParams params;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_gradient_norm = 0.0;
    double rmse_in_sample = 0.0;
};

/// One distance/path-loss observation for the log-distance fits.
struct DistanceSample {
    double distance = 0.0;
    double pathloss = 0.0;
};

/// Ordinary least squares of path loss on 10 log10(d / d0).
/// sigma is the residual standard deviation with K - 2 degrees of freedom.
LogDistParams ls_fit_logdist(std::span<const DistanceSample> data, double d0);

/// Least-squares start for fit_ml: the log-distance fit on sum_i D_i,
/// broadcast to every exponent.
PefParams ls_initial_params(const DesignMatrix& design);

/// Gradient ascent on the truncated log-likelihood over (n_i, C, log sigma).
/// Throws NumericalError if the likelihood is not finite at `init` or sigma
/// collapses below 1e-6 dB.
FitReport fit_ml(const DesignMatrix& design, const PefParams& init, const FitOptions& options = {});
FitReport fit_ml(const DesignMatrix& design, const FitOptions& options = {});

/// fit_ml with a single exponent and D_k = 10 log10(d_k / d0).
FitReport fit_ml_logdist(std::span<const DistanceSample> data, double d0, double truncation,
                         const LogDistParams* init = nullptr, const FitOptions& options = {});

LogDistParams to_logdist(const PefParams& params, double d0);

} // namespace pef
