#pragma once

// Assessment of point estimators on the subfamily: mean squared error, mean
// KL divergence, and Lambda-information with its efficiency relative to the
// Fisher information.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "shrinkinfo/errors.hpp"
#include "shrinkinfo/estimators.hpp"
#include "shrinkinfo/mc.hpp"
#include "shrinkinfo/model.hpp"

namespace shrinkinfo {

inline constexpr double max_condition_number = 1e12;

// Lambda-information of a scalar statistic: (dE/dtheta)^2 / V.
inline double lambda_scalar_univariate(double mean_slope, double variance) {
    if (!(variance > 0.0)) {
        throw DomainError("lambda_scalar_univariate: variance must be positive");
    }
    return mean_slope * mean_slope / variance;
}

inline Vector symmetric_eigenvalues(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalue decomposition did not converge");
    }
    return solver.eigenvalues();  // ascending
}

// Lambda = D^t V^{-1} D, symmetrized. `label` names the cell in errors.
inline Matrix lambda_matrix(const Matrix& d, const Matrix& v, const std::string& label = "estimator") {
    if (v.rows() != v.cols() || d.rows() != v.rows()) {
        throw DimensionError("lambda_matrix: D is " + std::to_string(d.rows()) + "x" + std::to_string(d.cols()) +
                             ", V is " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()));
    }
    const Matrix v_sym = 0.5 * (v + v.transpose());
    const Vector ev = symmetric_eigenvalues(v_sym);
    const double largest = ev.maxCoeff();
    const double smallest = ev.minCoeff();
    if (!(largest > 0.0) || !(smallest > 0.0) || largest / smallest > max_condition_number) {
        std::ostringstream msg;
        msg << "lambda_matrix: covariance of " << label << " is singular or ill-conditioned (eigenvalues "
            << smallest << " .. " << largest << ")";
        throw NumericalError(msg.str());
    }
    Eigen::LLT<Matrix> llt(v_sym);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("lambda_matrix: covariance of " + label + " is not positive definite");
    }
    const Matrix lambda = d.transpose() * llt.solve(d);
    return 0.5 * (lambda + lambda.transpose());
}

inline double scalar_lambda(const Matrix& lambda) {
    if (lambda.rows() != lambda.cols()) {
        throw DimensionError("scalar_lambda: matrix must be square");
    }
    return lambda.trace();
}

struct Efficiency {
    Matrix matrix;           // I^{-1/2} Lambda I^{-1/2}
    double mean_efficiency;  // trace / k
};

inline Efficiency efficiency(const Matrix& lambda, const Matrix& fisher) {
    if (lambda.rows() != lambda.cols() || fisher.rows() != fisher.cols() || lambda.rows() != fisher.rows()) {
        throw DimensionError("efficiency: Lambda and Fisher information must be square of equal size");
    }
    if (!fisher.isApprox(fisher.transpose(), 1e-12)) {
        throw DomainError("efficiency: Fisher information must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(fisher);
    if (solver.info() != Eigen::Success || !(solver.eigenvalues().minCoeff() > 0.0)) {
        throw DomainError("efficiency: Fisher information must be positive definite");
    }
    const Matrix root_inv = solver.operatorInverseSqrt();
    Matrix eff = root_inv * lambda * root_inv;
    eff = 0.5 * (eff + eff.transpose());
    const double mean = eff.trace() / static_cast<double>(eff.rows());
    return Efficiency{std::move(eff), mean};
}

struct AssessmentReport {
    EstimatorKind estimator = EstimatorKind::ml;
    double theta = 0.0;
    double mse = 0.0;
    double mse_stderr = 0.0;
    double mkl = 0.0;
    double mkl_stderr = 0.0;
    Matrix lambda_matrix;
    double scalar_lambda = 0.0;
    double scalar_lambda_stderr = 0.0;  // batch means; NaN below two batches
    Matrix efficiency_matrix;
    double mean_efficiency = 0.0;
    Vector eigenvalues;  // of lambda_matrix, ascending
    double eigen_min = 0.0;
    double eigen_max = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string cell_label(EstimatorKind kind, double theta) {
    std::ostringstream label;
    label << to_string(kind) << " at theta = " << theta;
    return label.str();
}

inline constexpr std::size_t lambda_batches = 20;

// Standard error of trace(Lambda) from independent batches of whole chunks.
inline double scalar_lambda_batch_stderr(const std::vector<EstimatorMoments>& parts, const std::string& label) {
    const std::size_t batches = std::min(lambda_batches, parts.size());
    if (batches < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    ScalarMoments spread;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t begin = parts.size() * b / batches;
        const std::size_t end = parts.size() * (b + 1) / batches;
        const auto batch = cross_covariance_from(merge_in_order(parts, begin, end).paired);
        spread.push(scalar_lambda(lambda_matrix(batch.d, batch.v, label)));
    }
    return spread.stderr_of_mean();
}

}  // namespace detail

// Full one-pass assessment of one (estimator, theta) cell.
inline AssessmentReport assess(EstimatorKind kind, double theta, const SimulationConfig& config) {
    const SimulationConfig cell = config.for_cell(Purpose::assessment, theta);
    cell.validate();
    if (cell.n_samples < min_covariance_samples) {
        throw NumericalError("assess: need at least " + std::to_string(min_covariance_samples) +
                             " samples, got " + std::to_string(cell.n_samples));
    }
    const std::string label = detail::cell_label(kind, theta);
    const auto parts = estimator_moments_by_chunk(KindEstimator{kind}, cell);
    const EstimatorMoments total = merge_in_order(parts, 0, parts.size());
    const CrossCovariance cc = cross_covariance_from(total.paired);

    AssessmentReport report;
    report.estimator = kind;
    report.theta = theta;
    report.mse = total.squared_error.mean();
    report.mse_stderr = total.squared_error.stderr_of_mean();
    report.mkl = total.kl_loss.mean();
    report.mkl_stderr = total.kl_loss.stderr_of_mean();
    report.lambda_matrix = lambda_matrix(cc.d, cc.v, label);
    report.scalar_lambda = scalar_lambda(report.lambda_matrix);
    report.scalar_lambda_stderr = detail::scalar_lambda_batch_stderr(parts, label);
    const Efficiency eff = efficiency(report.lambda_matrix, fisher_information(cell.k));
    report.efficiency_matrix = eff.matrix;
    report.mean_efficiency = eff.mean_efficiency;
    report.eigenvalues = symmetric_eigenvalues(report.lambda_matrix);
    report.eigen_min = report.eigenvalues.minCoeff();
    report.eigen_max = report.eigenvalues.maxCoeff();
    report.n_samples = cell.n_samples;
    report.seed = cell.seed;
    return report;
}

struct MonteCarloValue {
    double value;
    double std_error;
};

// E||est - theta 1||^2 on the assessment stream of the cell.
inline MonteCarloValue mse_with_stderr(EstimatorKind kind, double theta, const SimulationConfig& config) {
    const SimulationConfig cell = config.for_cell(Purpose::assessment, theta);
    const auto parts = estimator_moments_by_chunk(KindEstimator{kind}, cell);
    const auto total = merge_in_order(parts, 0, parts.size());
    return {total.squared_error.mean(), total.squared_error.stderr_of_mean()};
}

inline double mse(EstimatorKind kind, double theta, const SimulationConfig& config) {
    return mse_with_stderr(kind, theta, config).value;
}

// E[KL(m_est, m)] on the same stream as mse(); equals mse / 2 exactly.
inline double mkl(EstimatorKind kind, double theta, const SimulationConfig& config) {
    const SimulationConfig cell = config.for_cell(Purpose::assessment, theta);
    const auto parts = estimator_moments_by_chunk(KindEstimator{kind}, cell);
    return merge_in_order(parts, 0, parts.size()).kl_loss.mean();
}

inline Matrix lambda_matrix(EstimatorKind kind, double theta, const SimulationConfig& config) {
    const auto cc = cross_covariance(kind, config.for_cell(Purpose::assessment, theta));
    return lambda_matrix(cc.d, cc.v, detail::cell_label(kind, theta));
}

}  // namespace shrinkinfo
