#pragma once

// One-pass means and centered co-moments (Welford), mergeable across
// partitions of the stream with the pairwise update of Chan, Golub & LeVeque.

#include <cmath>
#include <cstdint>

#include "shrinkinfo/errors.hpp"
#include "shrinkinfo/model.hpp"

namespace shrinkinfo {

class ScalarMoments {
public:
    void push(double x) noexcept {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const ScalarMoments& other) noexcept {
        if (other.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count_);
        const double n_b = static_cast<double>(other.count_);
        const double n = n_a + n_b;
        const double delta = other.mean_ - mean_;
        mean_ += delta * (n_b / n);
        m2_ += other.m2_ + delta * delta * (n_a * n_b / n);
        count_ += other.count_;
    }

    std::uint64_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }

    double variance() const {
        if (count_ < 2) {
            throw NumericalError("ScalarMoments: variance needs at least two observations");
        }
        return m2_ / static_cast<double>(count_ - 1);
    }

    // Standard error of the mean.
    double stderr_of_mean() const { return std::sqrt(variance() / static_cast<double>(count_)); }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Streaming moments of a paired stream (a, b): means of both and the centered
// sums of cross-products C_aa, C_ab and C_bb. Covariances use 1/(N - 1).
class StreamingMoments {
public:
    StreamingMoments(Eigen::Index dim_a, Eigen::Index dim_b)
        : mean_a_(Vector::Zero(dim_a)),
          mean_b_(Vector::Zero(dim_b)),
          c_aa_(Matrix::Zero(dim_a, dim_a)),
          c_ab_(Matrix::Zero(dim_a, dim_b)),
          c_bb_(Matrix::Zero(dim_b, dim_b)),
          delta_a_(dim_a),
          delta_b_(dim_b) {}

    void push(const VectorRef& a, const VectorRef& b) {
        require_same_dimension(mean_a_.size(), a.size(), "StreamingMoments::push(a)");
        require_same_dimension(mean_b_.size(), b.size(), "StreamingMoments::push(b)");
        ++count_;
        const double n = static_cast<double>(count_);
        delta_a_ = a - mean_a_;
        delta_b_ = b - mean_b_;
        mean_a_ += delta_a_ / n;
        mean_b_ += delta_b_ / n;
        // delta * (x - new_mean)^T == delta * delta^T * (n - 1) / n
        const double w = (n - 1.0) / n;
        c_aa_.selfadjointView<Eigen::Lower>().rankUpdate(delta_a_, w);
        c_bb_.selfadjointView<Eigen::Lower>().rankUpdate(delta_b_, w);
        c_ab_.noalias() += (w * delta_a_) * delta_b_.transpose();
    }

    void merge(const StreamingMoments& other) {
        require_same_dimension(mean_a_.size(), other.mean_a_.size(), "StreamingMoments::merge(a)");
        require_same_dimension(mean_b_.size(), other.mean_b_.size(), "StreamingMoments::merge(b)");
        if (other.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count_);
        const double n_b = static_cast<double>(other.count_);
        const double n = n_a + n_b;
        const double w = n_a * n_b / n;
        delta_a_ = other.mean_a_ - mean_a_;
        delta_b_ = other.mean_b_ - mean_b_;
        mean_a_ += delta_a_ * (n_b / n);
        mean_b_ += delta_b_ * (n_b / n);
        c_aa_ += other.c_aa_;
        c_bb_ += other.c_bb_;
        c_ab_ += other.c_ab_;
        c_aa_.selfadjointView<Eigen::Lower>().rankUpdate(delta_a_, w);
        c_bb_.selfadjointView<Eigen::Lower>().rankUpdate(delta_b_, w);
        c_ab_.noalias() += (w * delta_a_) * delta_b_.transpose();
        count_ += other.count_;
    }

    std::uint64_t count() const noexcept { return count_; }
    const Vector& mean_a() const noexcept { return mean_a_; }
    const Vector& mean_b() const noexcept { return mean_b_; }

    Matrix cov_aa() const { return symmetric(c_aa_) / denominator(); }
    Matrix cov_bb() const { return symmetric(c_bb_) / denominator(); }
    Matrix cov_ab() const { return c_ab_ / denominator(); }

private:
    double denominator() const {
        if (count_ < 2) {
            throw NumericalError("StreamingMoments: covariance needs at least two observations");
        }
        return static_cast<double>(count_ - 1);
    }

    // Only the lower triangle of the symmetric co-moments is maintained.
    static Matrix symmetric(const Matrix& lower) {
        Matrix full = lower.selfadjointView<Eigen::Lower>();
        return full;
    }

    std::uint64_t count_ = 0;
    Vector mean_a_;
    Vector mean_b_;
    Matrix c_aa_;
    Matrix c_ab_;
    Matrix c_bb_;
    Vector delta_a_;
    Vector delta_b_;
};

}  // namespace shrinkinfo
