#pragma once

// The normal-means family M_k: k independent unit-variance normals with an
// unrestricted mean vector, and its one-dimensional subfamily mu = theta * 1.

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "shrinkinfo/errors.hpp"

namespace shrinkinfo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Vector>;

inline void require_same_dimension(Eigen::Index expected, Eigen::Index actual, const char* what) {
    if (expected != actual) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                             ", got " + std::to_string(actual));
    }
}

// A distribution in M_k, identified by its mean vector.
class ModelPoint {
public:
    explicit ModelPoint(Vector mu) : mu_(std::move(mu)) {
        if (mu_.size() < 1) {
            throw DimensionError("ModelPoint: dimension must be at least 1");
        }
        if (!mu_.allFinite()) {
            throw DomainError("ModelPoint: mean vector must be finite");
        }
    }

    const Vector& mu() const noexcept { return mu_; }
    Eigen::Index dimension() const noexcept { return mu_.size(); }

    friend bool operator==(const ModelPoint& a, const ModelPoint& b) {
        return a.mu_.size() == b.mu_.size() && a.mu_ == b.mu_;
    }

private:
    Vector mu_;
};

// A point of the subfamily M_1 = { m in M_k : mu(m) = theta * 1 }.
struct SubfamilyPoint {
    double theta = 0.0;
    int k = 1;

    ModelPoint embed() const {
        if (k < 1) {
            throw DimensionError("SubfamilyPoint: k must be positive");
        }
        return ModelPoint(Vector::Constant(k, theta));
    }
};

inline ModelPoint embed(double theta, int k) { return SubfamilyPoint{theta, k}.embed(); }

inline double log_density(const ModelPoint& point, const VectorRef& y) {
    require_same_dimension(point.dimension(), y.size(), "log_density");
    const double k = static_cast<double>(point.dimension());
    return -0.5 * (y - point.mu()).squaredNorm() - 0.5 * k * std::log(2.0 * std::numbers::pi);
}

// Gradient of the log-likelihood with respect to mu.
inline Vector score(const ModelPoint& point, const VectorRef& y) {
    require_same_dimension(point.dimension(), y.size(), "score");
    return y - point.mu();
}

// Fisher information of M_k in the mean parameterization.
inline Matrix fisher_information(int k) {
    if (k < 1) {
        throw DimensionError("fisher_information: k must be positive");
    }
    return Matrix::Identity(k, k);
}

// Kullback-Leibler divergence KL(p1, p2) = E_{p1} log(p1 / p2), via the closed
// Gaussian form 0.5 * ||mu1 - mu2||^2.
inline double kl(const ModelPoint& p1, const ModelPoint& p2) {
    require_same_dimension(p1.dimension(), p2.dimension(), "kl");
    return 0.5 * (p1.mu() - p2.mu()).squaredNorm();
}

}  // namespace shrinkinfo
