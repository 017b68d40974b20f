#include "pef/inference.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pef {

namespace {

constexpr double kSqrtHalfPi = 1.2533141373155002512;    // sqrt(pi / 2)
constexpr double kLogSqrtTwoPi = 0.91893853320467274178; // log(sqrt(2 pi))
constexpr double kMinSigma = 1e-6;

} // namespace

double normal_hazard(double z)
{
    if (!std::isfinite(z)) {
        throw NumericalError("normal_hazard: non-finite argument");
    }
    if (z < 8.0) {
        return std::exp(-0.5 * z * z) / (kSqrtHalfPi * std::erfc(z / std::numbers::sqrt2));
    }
    // 1 / Mills ratio = z + 1/(z + 2/(z + 3/(z + ...))), evaluated bottom-up.
    double t = z;
    for (int k = 60; k >= 1; --k) {
        t = z + k / t;
    }
    return t;
}

double log_normal_upper_tail(double z)
{
    if (z < 0.0) {
        return std::log1p(-0.5 * std::erfc(-z / std::numbers::sqrt2));
    }
    return -0.5 * z * z - kLogSqrtTwoPi - std::log(normal_hazard(z));
}

DesignMatrix::DesignMatrix(int type_count, double truncation) : type_count_(type_count), truncation_(truncation)
{
    if (type_count < 1) {
        throw DataError("design matrix needs at least one region type");
    }
    if (std::isnan(truncation) || truncation == -std::numeric_limits<double>::infinity()) {
        throw DataError("truncation level must be finite or +inf");
    }
}

void DesignMatrix::add_row(std::span<const double> coeffs, double observed)
{
    if (coeffs.size() != static_cast<std::size_t>(type_count_)) {
        throw DataError("design row has " + std::to_string(coeffs.size()) + " coefficients, expected " +
                        std::to_string(type_count_));
    }
    if (!std::isfinite(observed)) {
        throw DataError("observed path loss must be finite");
    }
    if (!(observed < truncation_)) {
        throw DataError("observed path loss " + text::fixed(observed) + " dB is not below the truncation level " +
                        text::fixed(truncation_) + " dB");
    }
    for (double d : coeffs) {
        if (!std::isfinite(d) || d < 0.0) {
            throw DataError("design coefficients must be finite and non-negative");
        }
    }
    coeffs_.insert(coeffs_.end(), coeffs.begin(), coeffs.end());
    observed_.push_back(observed);
}

void DesignMatrix::require_identifiable() const
{
    const auto needed = static_cast<std::size_t>(type_count_) + 2;
    if (size() < needed) {
        throw DataError("need at least " + std::to_string(needed) + " data points to identify " +
                        std::to_string(type_count_) + " exponent(s), C and sigma; got " + std::to_string(size()));
    }
}

std::vector<double> LoglikGradient::flat() const
{
    auto out = exponents;
    out.push_back(intercept);
    out.push_back(sigma);
    return out;
}

double LoglikGradient::max_abs() const
{
    double m = std::max(std::abs(intercept), std::abs(sigma));
    for (double g : exponents) {
        m = std::max(m, std::abs(g));
    }
    return m;
}

namespace {

void check_inputs(const DesignMatrix& design, const PefParams& params)
{
    if (params.type_count() != design.type_count()) {
        throw DataError("parameters have " + std::to_string(params.type_count()) + " exponents, design has " +
                        std::to_string(design.type_count()) + " region types");
    }
    if (!(params.sigma > 0.0) || !std::isfinite(params.sigma)) {
        throw DataError("sigma must be positive for the likelihood");
    }
}

struct TailTerms {
    double log_q = 0.0;
    double hazard = 0.0;
};

// log(1 - Phi(z)) and the hazard sharing one erfc evaluation. Below z = 8 the
// tail probability is computed directly; its log is accurate in absolute
// terms, which is all a sum of log-densities needs.
TailTerms upper_tail_terms(double z, bool want_hazard)
{
    if (z >= 8.0) {
        return {log_normal_upper_tail(z), want_hazard ? normal_hazard(z) : 0.0};
    }
    const double q = 0.5 * std::erfc(z / std::numbers::sqrt2);
    TailTerms t{std::log(q), 0.0};
    if (want_hazard) {
        t.hazard = std::exp(-0.5 * z * z) / (2.0 * kSqrtHalfPi * q);
    }
    return t;
}

// Log-likelihood and (optionally) its gradient in one pass. Sums are carried
// in extended precision; the order over k is fixed.
double evaluate(const DesignMatrix& design, const PefParams& params, LoglikGradient* grad)
{
    const double sigma = params.sigma;
    const double inv_s = 1.0 / sigma;
    const double inv_s2 = inv_s * inv_s;
    const double L = design.truncation();
    const bool truncated = design.truncated();
    const auto I = static_cast<std::size_t>(design.type_count());

    long double value = 0.0L;
    long double g_mu = 0.0L;
    long double g_sigma = 0.0L;
    std::vector<long double> g_n(grad ? I : 0, 0.0L);

    for (std::size_t k = 0; k < design.size(); ++k) {
        const auto d = design.coeffs(k);
        double mu = params.intercept_c;
        for (std::size_t i = 0; i < I; ++i) {
            mu += d[i] * params.exponents[i];
        }
        const double r = design.observed(k) - mu;
        double term = -0.5 * r * r * inv_s2;
        double hazard = 0.0;
        double z = 0.0;
        if (truncated) {
            z = (mu - L) * inv_s;
            const auto tail = upper_tail_terms(z, grad != nullptr);
            term -= tail.log_q;
            hazard = tail.hazard;
        }
        value += term;
        if (grad) {
            // d/dmu and d/dsigma of the per-point log-density.
            const double dmu = r * inv_s2 + hazard * inv_s;
            g_mu += dmu;
            g_sigma += r * r * inv_s2 * inv_s - z * hazard * inv_s;
            for (std::size_t i = 0; i < I; ++i) {
                g_n[i] += d[i] * dmu;
            }
        }
    }
    const auto K = static_cast<double>(design.size());
    value -= K * (std::log(sigma) + kLogSqrtTwoPi);
    if (grad) {
        grad->exponents.assign(g_n.begin(), g_n.end());
        grad->intercept = static_cast<double>(g_mu);
        grad->sigma = static_cast<double>(g_sigma - K * inv_s);
    }
    return static_cast<double>(value);
}

} // namespace

double truncated_loglik(const DesignMatrix& design, const PefParams& params)
{
    check_inputs(design, params);
    return evaluate(design, params, nullptr);
}

LoglikGradient loglik_gradient(const DesignMatrix& design, const PefParams& params)
{
    check_inputs(design, params);
    LoglikGradient g;
    evaluate(design, params, &g);
    return g;
}

LogDistParams ls_fit_logdist(std::span<const DistanceSample> data, double d0)
{
    if (!(d0 > 0.0)) {
        throw DataError("d0 must be positive");
    }
    if (data.size() < 3) {
        throw DataError("least-squares fit needs at least 3 points, got " + std::to_string(data.size()));
    }
    const auto K = static_cast<double>(data.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& s : data) {
        if (!(s.distance >= d0)) {
            throw DataError("distance " + text::round_trip(s.distance) + " m is below d0");
        }
        mean_x += 10.0 * std::log10(s.distance / d0);
        mean_y += s.pathloss;
    }
    mean_x /= K;
    mean_y /= K;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : data) {
        const double dx = 10.0 * std::log10(s.distance / d0) - mean_x;
        sxx += dx * dx;
        sxy += dx * (s.pathloss - mean_y);
    }
    if (!(sxx > 0.0)) {
        throw DataError("degenerate regressor: all distances are equal");
    }
    LogDistParams out;
    out.d0 = d0;
    out.n = sxy / sxx;
    out.intercept_c = mean_y - out.n * mean_x;
    double rss = 0.0;
    for (const auto& s : data) {
        const double r = s.pathloss - predict_logdist(s.distance, out);
        rss += r * r;
    }
    out.sigma = std::sqrt(rss / (K - 2.0));
    return out;
}

PefParams ls_initial_params(const DesignMatrix& design)
{
    design.require_identifiable();
    // sum_i D_i = 10 log10(d / d0), so d / d0 is recoverable from the row.
    std::vector<DistanceSample> samples;
    samples.reserve(design.size());
    for (std::size_t k = 0; k < design.size(); ++k) {
        double total = 0.0;
        for (double d : design.coeffs(k)) {
            total += d;
        }
        samples.push_back({std::pow(10.0, total / 10.0), design.observed(k)});
    }
    const auto ls = ls_fit_logdist(samples, 1.0);
    PefParams p;
    p.intercept_c = ls.intercept_c;
    p.exponents.assign(static_cast<std::size_t>(design.type_count()), ls.n);
    p.sigma = std::max(ls.sigma, 1e-3);
    return p;
}

namespace {

// Ascent runs in centered, standardized coordinates u:
//   n_i     = a_i u_i               (a_i = 1 / column standard deviation)
//   C       = u_C - sum_i mean_i n_i
//   log sig = c u_s                 (c matches the curvature of the other axes)
// Raw (n, C) are nearly collinear because every row carries a large positive
// sum of coefficients; without this the ascent needs thousands of steps.
struct Coordinates {
    std::vector<double> mean;
    std::vector<double> scale;
    double sigma_scale = 1.0;

    Coordinates(const DesignMatrix& design, double sigma0)
    {
        const auto I = static_cast<std::size_t>(design.type_count());
        const auto K = static_cast<double>(design.size());
        std::vector<long double> sum(I, 0.0L);
        std::vector<long double> sum2(I, 0.0L);
        for (std::size_t k = 0; k < design.size(); ++k) {
            const auto d = design.coeffs(k);
            for (std::size_t i = 0; i < I; ++i) {
                sum[i] += d[i];
                sum2[i] += static_cast<long double>(d[i]) * d[i];
            }
        }
        mean.resize(I);
        scale.resize(I);
        for (std::size_t i = 0; i < I; ++i) {
            mean[i] = static_cast<double>(sum[i] / K);
            const double var = static_cast<double>(sum2[i] / K) - mean[i] * mean[i];
            const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
            scale[i] = sd > 1e-9 * std::max(1.0, std::abs(mean[i])) ? 1.0 / sd : 1.0;
        }
        sigma_scale = 1.0 / (sigma0 * std::numbers::sqrt2);
    }

    std::vector<double> to_u(const PefParams& p) const
    {
        const std::size_t I = mean.size();
        std::vector<double> u(I + 2);
        double shift = 0.0;
        for (std::size_t i = 0; i < I; ++i) {
            u[i] = p.exponents[i] / scale[i];
            shift += mean[i] * p.exponents[i];
        }
        u[I] = p.intercept_c + shift;
        u[I + 1] = std::log(p.sigma) / sigma_scale;
        return u;
    }

    PefParams from_u(const std::vector<double>& u) const
    {
        const std::size_t I = mean.size();
        PefParams p;
        p.exponents.resize(I);
        double shift = 0.0;
        for (std::size_t i = 0; i < I; ++i) {
            p.exponents[i] = scale[i] * u[i];
            shift += mean[i] * p.exponents[i];
        }
        p.intercept_c = u[I] - shift;
        p.sigma = std::exp(sigma_scale * u[I + 1]);
        return p;
    }

    std::vector<double> gradient(const LoglikGradient& g, double sigma) const
    {
        const std::size_t I = mean.size();
        std::vector<double> out(I + 2);
        for (std::size_t i = 0; i < I; ++i) {
            out[i] = scale[i] * (g.exponents[i] - mean[i] * g.intercept);
        }
        out[I] = g.intercept;
        out[I + 1] = sigma_scale * sigma * g.sigma;
        return out;
    }
};

double rmse(const DesignMatrix& design, const PefParams& params)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < design.size(); ++k) {
        const auto d = design.coeffs(k);
        double mu = params.intercept_c;
        for (std::size_t i = 0; i < d.size(); ++i) {
            mu += d[i] * params.exponents[i];
        }
        const double r = design.observed(k) - mu;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(design.size()));
}

void check_sigma(double sigma)
{
    if (!(sigma >= kMinSigma)) {
        throw NumericalError("sigma collapsed below " + text::round_trip(kMinSigma) + " dB during the fit");
    }
}

} // namespace

FitReport fit_ml(const DesignMatrix& design, const PefParams& init, const FitOptions& options)
{
    design.require_identifiable();
    check_inputs(design, init);
    init.validate();
    if (!(options.initial_step > 0.0) || options.max_iterations < 0 || !(options.gradient_tolerance > 0.0)) {
        throw DataError("invalid optimizer options");
    }
    const double tolerance = options.gradient_tolerance * static_cast<double>(design.size());

    const Coordinates coords(design, init.sigma);
    std::vector<double> theta = coords.to_u(init);

    PefParams params = init;
    LoglikGradient grad;
    double value = evaluate(design, params, &grad);
    if (!std::isfinite(value)) {
        throw NumericalError("log-likelihood is not finite at the initial parameters");
    }
    auto g = coords.gradient(grad, params.sigma);

    FitReport report;
    double step = options.initial_step;
    std::vector<double> prev_theta;
    std::vector<double> prev_g;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (grad.max_abs() < tolerance) {
            break;
        }
        // Barzilai-Borwein estimate of the step from the last accepted move.
        if (!options.fixed_step && !prev_theta.empty()) {
            double ss = 0.0;
            double sy = 0.0;
            for (std::size_t j = 0; j < theta.size(); ++j) {
                const double s = theta[j] - prev_theta[j];
                const double y = g[j] - prev_g[j];
                ss += s * s;
                sy += s * y;
            }
            if (sy < 0.0 && std::isfinite(ss / -sy)) {
                step = ss / -sy;
            }
        }

        std::vector<double> trial(theta.size());
        PefParams trial_params;
        LoglikGradient trial_grad;
        double trial_value = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 80; ++halvings) {
            for (std::size_t j = 0; j < theta.size(); ++j) {
                trial[j] = theta[j] + step * g[j];
            }
            trial_params = coords.from_u(trial);
            trial_value = evaluate(design, trial_params, &trial_grad);
            if (options.fixed_step) {
                check_sigma(trial_params.sigma);
                if (!std::isfinite(trial_value)) {
                    throw NumericalError("log-likelihood became non-finite with the fixed step");
                }
                accepted = true;
                break;
            }
            if (std::isfinite(trial_value) && trial_value > value) {
                check_sigma(trial_params.sigma);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No representable ascent left along the gradient.
            break;
        }
        prev_theta = std::exchange(theta, trial);
        prev_g = std::exchange(g, coords.gradient(trial_grad, trial_params.sigma));
        params = trial_params;
        grad = trial_grad;
        value = trial_value;
    }

    report.params = params;
    report.log_likelihood = value;
    report.iterations = iter;
    report.final_gradient_norm = grad.max_abs();
    report.converged = report.final_gradient_norm < tolerance;
    report.rmse_in_sample = rmse(design, params);
    return report;
}

FitReport fit_ml(const DesignMatrix& design, const FitOptions& options)
{
    return fit_ml(design, ls_initial_params(design), options);
}

FitReport fit_ml_logdist(std::span<const DistanceSample> data, double d0, double truncation,
                         const LogDistParams* init, const FitOptions& options)
{
    if (data.size() < 3) {
        throw DataError("log-distance fit needs at least 3 points, got " + std::to_string(data.size()));
    }
    if (!(d0 > 0.0)) {
        throw DataError("d0 must be positive");
    }
    DesignMatrix design(1, truncation);
    for (const auto& s : data) {
        if (!(s.distance >= d0)) {
            throw DataError("distance " + text::round_trip(s.distance) + " m is below d0");
        }
        const double coeff = 10.0 * std::log10(s.distance / d0);
        design.add_row(std::span<const double>(&coeff, 1), s.pathloss);
    }
    if (init == nullptr) {
        return fit_ml(design, options);
    }
    PefParams start{init->intercept_c, {init->n}, init->sigma};
    return fit_ml(design, start, options);
}

LogDistParams to_logdist(const PefParams& params, double d0)
{
    if (params.type_count() != 1) {
        throw DataError("log-distance parameters need exactly one exponent");
    }
    return {params.intercept_c, params.exponents.front(), params.sigma, d0};
}

} // namespace pef
