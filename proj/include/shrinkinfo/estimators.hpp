#pragma once

// Point estimators of mu on M_k and the generalized estimator
// g(y, theta) = thetahat(y) - E_theta[thetahat] built from a point estimator.

#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shrinkinfo/errors.hpp"
#include "shrinkinfo/model.hpp"

namespace shrinkinfo {

enum class EstimatorKind { ml, js };

inline constexpr std::string_view to_string(EstimatorKind kind) noexcept {
    return kind == EstimatorKind::ml ? "ML" : "JS";
}

// Anything that maps an observation y in R^k to an estimate in R^k.
template <class F>
concept VectorEstimator = std::invocable<const F&, const Vector&> &&
                          std::convertible_to<std::invoke_result_t<const F&, const Vector&>, Vector>;

// Squared norms below this are rejected along with exact zero: the shrinkage
// factor would overflow.
inline constexpr double min_squared_norm = 1e-300;

inline Vector ml_estimate(const VectorRef& y) { return y; }

// 1 - (k - 2) / ||y||^2. Negative when ||y||^2 < k - 2, in which case the
// James-Stein estimate flips the sign of every component.
inline double shrinkage_factor(const VectorRef& y, int k) {
    require_same_dimension(k, y.size(), "shrinkage_factor");
    const double norm2 = y.squaredNorm();
    if (!(norm2 >= min_squared_norm)) {
        throw DomainError("shrinkage_factor: ||y||^2 = " + std::to_string(norm2) +
                          " is zero or too small");
    }
    return 1.0 - static_cast<double>(k - 2) / norm2;
}

/// James-Stein estimate (1 - (k - 2) / ||y||^2) y.
///
/// Accepted for every k >= 1 but only dominates the ML estimate in MSE for
/// k >= 3. For k = 2 it is the ML estimate; for k = 1 it expands away from 0.
inline Vector js_estimate(const VectorRef& y, int k) { return shrinkage_factor(y, k) * y; }

inline Vector estimate(EstimatorKind kind, const VectorRef& y) {
    if (kind == EstimatorKind::ml) {
        return ml_estimate(y);
    }
    return js_estimate(y, static_cast<int>(y.size()));
}

// Function-object form used by the simulation engine.
struct KindEstimator {
    EstimatorKind kind;
    Vector operator()(const Vector& y) const { return estimate(kind, y); }
};

// Where a tabulated mean function came from.
struct MeanFunctionProvenance {
    std::string estimator;
    std::uint64_t seed = 0;
    std::uint32_t stream = 0;
    std::uint64_t n_samples = 0;
};

// g(y, .) tabulated on an increasing grid of subfamily parameters:
// values[i] = thetahat(y) - E_{grid[i]} thetahat.
class GeneralizedEstimatorCurve {
public:
    GeneralizedEstimatorCurve(std::vector<double> grid, std::vector<double> values,
                              MeanFunctionProvenance provenance = {})
        : grid_(std::move(grid)), values_(std::move(values)), provenance_(std::move(provenance)) {
        if (grid_.size() != values_.size()) {
            throw DimensionError("GeneralizedEstimatorCurve: grid has " + std::to_string(grid_.size()) +
                                 " points but " + std::to_string(values_.size()) + " values");
        }
        if (grid_.size() < 2) {
            throw DimensionError("GeneralizedEstimatorCurve: need at least two grid points");
        }
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            if (!(grid_[i] > grid_[i - 1])) {
                throw DomainError("GeneralizedEstimatorCurve: grid must be strictly increasing");
            }
        }
    }

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const MeanFunctionProvenance& provenance() const noexcept { return provenance_; }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    MeanFunctionProvenance provenance_;
};

inline GeneralizedEstimatorCurve build_generalized(double summary, std::vector<double> grid,
                                                   const std::vector<double>& mean_function,
                                                   MeanFunctionProvenance provenance = {}) {
    if (grid.size() != mean_function.size()) {
        throw DimensionError("build_generalized: grid has " + std::to_string(grid.size()) +
                             " points but mean function has " + std::to_string(mean_function.size()));
    }
    std::vector<double> values(mean_function.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = summary - mean_function[i];
    }
    return GeneralizedEstimatorCurve(std::move(grid), std::move(values), std::move(provenance));
}

// Scalar summary thetahat(y) applied to a sample, then as above.
template <class Summary>
    requires std::invocable<const Summary&, const Vector&>
GeneralizedEstimatorCurve build_generalized(const Summary& summary, const Vector& y,
                                            std::vector<double> grid,
                                            const std::vector<double>& mean_function,
                                            MeanFunctionProvenance provenance = {}) {
    return build_generalized(static_cast<double>(summary(y)), std::move(grid), mean_function,
                             std::move(provenance));
}

// Point estimate from {m : g(y, m) = 0}: the first grid point where the curve
// is exactly zero or, if a sign change comes first, linear interpolation
// inside that interval.
inline double zero_crossing(const GeneralizedEstimatorCurve& curve) {
    const auto& grid = curve.grid();
    const auto& values = curve.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0) {
            return grid[i];
        }
        if (i > 0 && ((values[i - 1] < 0.0) != (values[i] < 0.0))) {
            const double lo = values[i - 1];
            const double hi = values[i];
            return grid[i - 1] + (grid[i] - grid[i - 1]) * lo / (lo - hi);
        }
    }
    throw NoCrossingError(values.front(), values.back());
}

}  // namespace shrinkinfo
