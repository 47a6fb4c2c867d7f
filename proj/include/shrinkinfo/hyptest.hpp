#pragma once

// Tests of H0: mu = mu0 * 1 with statistics sum_i (est_i - mu0)^2, calibrated
// against simulated null distributions; power, semi-tail standardization and
// paired per-sample comparisons of the ML and JS tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "shrinkinfo/errors.hpp"
#include "shrinkinfo/estimators.hpp"
#include "shrinkinfo/mc.hpp"
#include "shrinkinfo/model.hpp"

namespace shrinkinfo {

inline constexpr double default_null_theta = 1.25;

inline double test_statistic(EstimatorKind kind, const VectorRef& y, double mu0) {
    if (!std::isfinite(mu0)) {
        throw DomainError("test_statistic: mu0 must be finite");
    }
    return (estimate(kind, y).array() - mu0).square().sum();
}

// Applied to every statistic before calibration and evaluation. Must be
// strictly increasing; tail proportions are invariant under such maps.
struct IdentityTransform {
    constexpr double operator()(double t) const noexcept { return t; }
};

struct NullCalibration {
    EstimatorKind kind = EstimatorKind::ml;
    double mu0 = default_null_theta;
    std::vector<double> sorted_null;
    std::map<double, double> critical_values;  // alpha -> threshold
    std::uint64_t n_null = 0;
    std::uint64_t seed = 0;

    double critical_value(double alpha) const {
        const auto it = critical_values.find(alpha);
        if (it == critical_values.end()) {
            throw std::out_of_range("NullCalibration: no critical value for alpha " + std::to_string(alpha));
        }
        return it->second;
    }
};

// Empirical (1 - alpha) quantile: sorted[ceil((1 - alpha)(n + 1)) - 1],
// clamped to valid indices.
inline double empirical_critical_value(const std::vector<double>& sorted, double alpha) {
    if (sorted.empty()) {
        throw NumericalError("empirical_critical_value: empty null sample");
    }
    const double n = static_cast<double>(sorted.size());
    const double rank = std::ceil((1.0 - alpha) * (n + 1.0)) - 1.0;
    const auto index = static_cast<std::size_t>(std::clamp(rank, 0.0, n - 1.0));
    return sorted[index];
}

inline void validate_alphas(const std::vector<double>& alphas) {
    if (alphas.empty()) {
        throw std::invalid_argument("at least one significance level is required");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw std::invalid_argument("significance level " + std::to_string(a) + " outside (0, 1)");
        }
    }
}

// Simulates config.n_samples statistics under H0: mu = config.theta * 1.
template <class Transform = IdentityTransform>
NullCalibration calibrate_null(EstimatorKind kind, const SimulationConfig& config,
                               const std::vector<double>& alphas, const Transform& transform = {}) {
    validate_alphas(alphas);
    config.validate();
    const double min_alpha = *std::min_element(alphas.begin(), alphas.end());
    if (static_cast<double>(config.n_samples) < 100.0 / min_alpha) {
        throw NumericalError("insufficient null resolution: " + std::to_string(config.n_samples) +
                             " null draws for alpha = " + std::to_string(min_alpha) + " (need at least " +
                             std::to_string(static_cast<std::uint64_t>(std::ceil(100.0 / min_alpha))) + ")");
    }
    const double mu0 = config.theta;
    const SimulationConfig cell = config.for_cell(Purpose::null_calibration, mu0);
    const auto parts = map_chunks(cell, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<double> stats;
        stats.reserve(end - begin);
        for_each_sample(cell, begin, end, [&](std::uint64_t, const Vector& y) {
            stats.push_back(transform(test_statistic(kind, y, mu0)));
        });
        return stats;
    });

    NullCalibration calibration;
    calibration.kind = kind;
    calibration.mu0 = mu0;
    calibration.n_null = cell.n_samples;
    calibration.seed = cell.seed;
    calibration.sorted_null.reserve(cell.n_samples);
    for (const auto& part : parts) {
        calibration.sorted_null.insert(calibration.sorted_null.end(), part.begin(), part.end());
    }
    std::sort(calibration.sorted_null.begin(), calibration.sorted_null.end());
    for (double a : alphas) {
        calibration.critical_values[a] = empirical_critical_value(calibration.sorted_null, a);
    }
    return calibration;
}

struct PowerCell {
    double alpha = 0.0;
    double critical_value = 0.0;
    std::uint64_t exceed_count = 0;
    std::uint64_t n = 0;
    double power = 0.0;
    double std_error = 0.0;  // binomial
};

// Fraction of draws at theta_alt whose statistic strictly exceeds each
// critical value of the calibration, one cell per alpha in ascending order.
template <class Transform = IdentityTransform>
std::vector<PowerCell> power(EstimatorKind kind, double theta_alt, const NullCalibration& calibration,
                             const SimulationConfig& config, const Transform& transform = {}) {
    if (calibration.kind != kind) {
        throw std::invalid_argument("power: calibration was built for " + std::string(to_string(calibration.kind)) +
                                    ", not " + std::string(to_string(kind)));
    }
    const SimulationConfig cell = config.for_cell(Purpose::power, theta_alt);
    cell.validate();
    std::vector<double> thresholds;
    for (const auto& [alpha, critical] : calibration.critical_values) {
        thresholds.push_back(critical);
    }
    const double mu0 = calibration.mu0;
    const auto parts = map_chunks(cell, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<std::uint64_t> counts(thresholds.size(), 0);
        for_each_sample(cell, begin, end, [&](std::uint64_t, const Vector& y) {
            const double t = transform(test_statistic(kind, y, mu0));
            for (std::size_t j = 0; j < thresholds.size(); ++j) {
                counts[j] += t > thresholds[j] ? 1 : 0;
            }
        });
        return counts;
    });

    std::vector<PowerCell> cells;
    std::size_t j = 0;
    for (const auto& [alpha, critical] : calibration.critical_values) {
        PowerCell pc;
        pc.alpha = alpha;
        pc.critical_value = critical;
        pc.n = cell.n_samples;
        for (const auto& counts : parts) {
            pc.exceed_count += counts[j];
        }
        pc.power = static_cast<double>(pc.exceed_count) / static_cast<double>(pc.n);
        pc.std_error = std::sqrt(pc.power * (1.0 - pc.power) / static_cast<double>(pc.n));
        cells.push_back(pc);
        ++j;
    }
    return cells;
}

// Semi-tail value s = -log2 P0(T >= t), with the add-one tail estimate
// (#{null >= t} + 1) / (n + 1) so that s stays finite.
inline double semitail(double t, const NullCalibration& calibration) {
    const auto& null = calibration.sorted_null;
    if (null.empty()) {
        throw NumericalError("semitail: empty null calibration");
    }
    const auto at_least = static_cast<double>(null.end() - std::lower_bound(null.begin(), null.end(), t));
    const double tail = (at_least + 1.0) / (static_cast<double>(null.size()) + 1.0);
    return -std::log2(tail);
}

struct SemiTailPair {
    std::uint64_t sample_index = 0;
    double s_js = 0.0;
    double s_ml = 0.0;
    double shrinkage = 0.0;
};

// n_points samples at theta_alt; both statistics are evaluated on the same
// draw and standardized against their own null calibration.
inline std::vector<SemiTailPair> paired_semitail(double theta_alt, std::uint64_t n_points,
                                                 const NullCalibration& calib_js,
                                                 const NullCalibration& calib_ml,
                                                 const SimulationConfig& config) {
    if (calib_js.kind != EstimatorKind::js || calib_ml.kind != EstimatorKind::ml) {
        throw std::invalid_argument("paired_semitail: expected a JS and an ML calibration");
    }
    if (calib_js.mu0 != calib_ml.mu0) {
        throw std::invalid_argument("paired_semitail: calibrations target different null hypotheses");
    }
    if (n_points < 1) {
        throw std::invalid_argument("paired_semitail: n_points must be positive");
    }
    SimulationConfig cell = config.for_cell(Purpose::figure, theta_alt);
    cell.n_samples = n_points;
    const double mu0 = calib_ml.mu0;
    const auto parts = map_chunks(cell, [&](std::uint64_t begin, std::uint64_t end) {
        std::vector<SemiTailPair> pairs;
        for_each_sample(cell, begin, end, [&](std::uint64_t index, const Vector& y) {
            SemiTailPair pair;
            pair.sample_index = index;
            pair.s_js = semitail(test_statistic(EstimatorKind::js, y, mu0), calib_js);
            pair.s_ml = semitail(test_statistic(EstimatorKind::ml, y, mu0), calib_ml);
            pair.shrinkage = shrinkage_factor(y, cell.k);
            pairs.push_back(pair);
        });
        return pairs;
    });
    std::vector<SemiTailPair> out;
    out.reserve(n_points);
    for (const auto& part : parts) {
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// P(chi2_k(ncp) > critical) with ncp = k (theta_alt - mu0)^2: the exact
// probability that the ML statistic exceeds a fixed threshold.
inline double ml_exceedance_oracle(double theta_alt, double critical, int k, double mu0 = default_null_theta) {
    if (k < 1) {
        throw std::invalid_argument("ml_exceedance_oracle: k must be positive");
    }
    const double ncp = static_cast<double>(k) * (theta_alt - mu0) * (theta_alt - mu0);
    if (ncp == 0.0) {
        return boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), critical));
    }
    return boost::math::cdf(
        boost::math::complement(boost::math::non_central_chi_squared(k, ncp), critical));
}

// Exact power of the ML test at level alpha: the central chi2_k (1 - alpha)
// quantile as threshold, evaluated under the noncentral alternative.
inline double ml_power_oracle(double theta_alt, double alpha, int k, double mu0 = default_null_theta) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("ml_power_oracle: alpha outside (0, 1)");
    }
    const double ncp = static_cast<double>(k) * (theta_alt - mu0) * (theta_alt - mu0);
    if (ncp == 0.0) {
        return alpha;
    }
    const double critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(k), alpha));
    return ml_exceedance_oracle(theta_alt, critical, k, mu0);
}

}  // namespace shrinkinfo
