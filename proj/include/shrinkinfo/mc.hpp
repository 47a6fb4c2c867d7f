#pragma once

// Deterministic Monte Carlo over the subfamily mu = theta * 1 of M_k.
//
// Samples are processed in fixed-size chunks of contiguous indices. Workers
// claim chunks in increasing order and each chunk produces an independent
// partial result; the coordinator then combines the partials in chunk order.
// Together with the counter-based substreams this makes every result
// bit-identical for any worker count.

#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "shrinkinfo/errors.hpp"
#include "shrinkinfo/estimators.hpp"
#include "shrinkinfo/model.hpp"
#include "shrinkinfo/moments.hpp"
#include "shrinkinfo/random.hpp"

namespace shrinkinfo {

inline constexpr std::uint64_t default_samples = 1'000'000;
inline constexpr std::uint64_t default_seed = 1;
inline constexpr std::uint64_t chunk_size = 4096;

// What a simulation cell is used for; cells with different purposes draw from
// disjoint substreams.
enum class Purpose : std::uint32_t {
    assessment = 1,
    null_calibration = 2,
    power = 3,
    figure = 4,
    mean_function = 5,
};

inline std::uint32_t cell_stream(Purpose purpose, double theta) noexcept {
    return (static_cast<std::uint32_t>(purpose) << 28) ^ (hash_double(theta) & 0x0FFFFFFFu);
}

struct SimulationConfig {
    int k = 14;
    double theta = 0.0;
    std::uint64_t n_samples = default_samples;
    std::uint64_t seed = default_seed;
    unsigned n_workers = 1;
    std::uint32_t stream = 0;

    void validate() const {
        if (k < 1) {
            throw std::invalid_argument("SimulationConfig: k must be positive");
        }
        if (!std::isfinite(theta)) {
            throw std::invalid_argument("SimulationConfig: theta must be finite");
        }
        if (n_samples < 1) {
            throw std::invalid_argument("SimulationConfig: n_samples must be positive");
        }
        if (n_workers < 1) {
            throw std::invalid_argument("SimulationConfig: n_workers must be positive");
        }
    }

    // The same run parameters aimed at the cell (purpose, theta).
    SimulationConfig for_cell(Purpose purpose, double cell_theta) const {
        SimulationConfig cell = *this;
        cell.theta = cell_theta;
        cell.stream = cell_stream(purpose, cell_theta);
        return cell;
    }
};

inline void draw_sample_into(const SimulationConfig& config, std::uint64_t index, Vector& y) {
    y.resize(config.k);
    standard_normals(config.seed, config.stream, index, std::span<double>(y.data(), y.size()));
    y.array() += config.theta;
}

// y = theta * 1 + z with z drawn from the substream (seed, stream, index).
inline Vector draw_sample(const SimulationConfig& config, std::uint64_t index) {
    config.validate();
    if (index >= config.n_samples) {
        throw std::out_of_range("draw_sample: index " + std::to_string(index) + " outside [0, " +
                                std::to_string(config.n_samples) + ")");
    }
    Vector y;
    draw_sample_into(config, index, y);
    return y;
}

inline std::uint64_t chunk_count(std::uint64_t n_samples) noexcept {
    return (n_samples + chunk_size - 1) / chunk_size;
}

// Runs fn(begin, end) for every chunk [begin, end) of [0, n_samples) and
// returns the results in chunk order. If chunks fail, the error of the
// lowest-numbered failing chunk is rethrown.
template <class ChunkFn>
auto map_chunks(const SimulationConfig& config, ChunkFn&& fn)
    -> std::vector<std::invoke_result_t<ChunkFn&, std::uint64_t, std::uint64_t>> {
    using Result = std::invoke_result_t<ChunkFn&, std::uint64_t, std::uint64_t>;
    config.validate();
    const std::uint64_t n_chunks = chunk_count(config.n_samples);
    std::vector<std::optional<Result>> slots(n_chunks);
    std::vector<std::exception_ptr> errors(n_chunks);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) {
                return;
            }
            const std::uint64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) {
                return;
            }
            const std::uint64_t begin = c * chunk_size;
            const std::uint64_t end = std::min(config.n_samples, begin + chunk_size);
            try {
                slots[c].emplace(fn(begin, end));
            } catch (...) {
                errors[c] = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
            }
        }
    };

    const auto n_threads = static_cast<unsigned>(std::min<std::uint64_t>(config.n_workers, n_chunks));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            threads.emplace_back(worker);
        }
    }

    for (const auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
    std::vector<Result> results;
    results.reserve(n_chunks);
    for (auto& slot : slots) {
        results.push_back(std::move(*slot));
    }
    return results;
}

// Calls visit(index, y) for each sample of [begin, end). Domain errors raised
// by the visitor abort the run and name the offending sample.
template <class Visit>
void for_each_sample(const SimulationConfig& config, std::uint64_t begin, std::uint64_t end, Visit&& visit) {
    Vector y(config.k);
    for (std::uint64_t i = begin; i < end; ++i) {
        draw_sample_into(config, i, y);
        try {
            visit(i, y);
        } catch (const DomainError& e) {
            throw SampleError(i, e.what());
        }
    }
}

// One-pass accumulation over a stream of (a, b) pairs.
template <class PairRange>
StreamingMoments accumulate(const PairRange& pairs) {
    auto it = std::begin(pairs);
    if (it == std::end(pairs)) {
        throw NumericalError("accumulate: empty stream");
    }
    StreamingMoments moments(it->first.size(), it->second.size());
    for (; it != std::end(pairs); ++it) {
        moments.push(it->first, it->second);
    }
    return moments;
}

// Per-chunk moments of an estimator against the score on one stream: the
// paired (estimate, score) moments, the squared error ||est - mu||^2 and the
// KL loss KL(m_est, m) = ||est - mu||^2 / 2.
struct EstimatorMoments {
    StreamingMoments paired;
    ScalarMoments squared_error;
    ScalarMoments kl_loss;

    explicit EstimatorMoments(Eigen::Index k) : paired(k, k) {}

    void merge(const EstimatorMoments& other) {
        paired.merge(other.paired);
        squared_error.merge(other.squared_error);
        kl_loss.merge(other.kl_loss);
    }
};

template <VectorEstimator Estimator>
std::vector<EstimatorMoments> estimator_moments_by_chunk(const Estimator& estimator,
                                                         const SimulationConfig& config) {
    const ModelPoint truth = embed(config.theta, config.k);
    return map_chunks(config, [&](std::uint64_t begin, std::uint64_t end) {
        EstimatorMoments acc(config.k);
        Vector est(config.k);
        for_each_sample(config, begin, end, [&](std::uint64_t, const Vector& y) {
            est = estimator(y);
            require_same_dimension(config.k, est.size(), "estimator output");
            acc.paired.push(est, score(truth, y));
            const ModelPoint fitted(est);
            acc.squared_error.push((est - truth.mu()).squaredNorm());
            acc.kl_loss.push(kl(fitted, truth));
        });
        return acc;
    });
}

inline EstimatorMoments merge_in_order(const std::vector<EstimatorMoments>& parts, std::size_t begin,
                                       std::size_t end) {
    EstimatorMoments total(parts.at(begin).paired.mean_a().size());
    for (std::size_t i = begin; i < end; ++i) {
        total.merge(parts[i]);
    }
    return total;
}

inline constexpr std::uint64_t min_covariance_samples = 10'000;

struct CrossCovariance {
    Matrix d;         // Cov(estimate, score): the Jacobian of E[estimate] in mu
    Matrix v;         // Cov(estimate, estimate)
    Vector mean_est;  // sample mean of the estimate
    std::uint64_t n_samples = 0;
};

inline CrossCovariance cross_covariance_from(const StreamingMoments& m) {
    return CrossCovariance{m.cov_ab(), m.cov_aa(), m.mean_a(), m.count()};
}

// D = Cov(est, score) and V = Cov(est, est) on one seeded stream, from the
// identity grad^t E[est] = Cov(est, grad log m).
template <VectorEstimator Estimator>
CrossCovariance cross_covariance(const Estimator& estimator, const SimulationConfig& config) {
    config.validate();
    if (config.n_samples < min_covariance_samples) {
        throw NumericalError("cross_covariance: need at least " + std::to_string(min_covariance_samples) +
                             " samples, got " + std::to_string(config.n_samples));
    }
    const auto parts = estimator_moments_by_chunk(estimator, config);
    return cross_covariance_from(merge_in_order(parts, 0, parts.size()).paired);
}

inline CrossCovariance cross_covariance(EstimatorKind kind, const SimulationConfig& config) {
    return cross_covariance(KindEstimator{kind}, config);
}

inline std::uint32_t mean_function_row_stream(std::uint32_t stream, std::size_t grid_index) noexcept {
    return mix32(stream ^ mix32(static_cast<std::uint32_t>(grid_index) * 0x9E3779B9u + 0x7F4A7C15u));
}

// Row i is the Monte Carlo mean of the estimate at theta = grid[i], drawn
// from its own substream derived from (stream, i).
template <VectorEstimator Estimator>
Matrix tabulate_mean_function(const Estimator& estimator, const std::vector<double>& grid,
                              const SimulationConfig& config) {
    if (grid.empty()) {
        throw std::invalid_argument("tabulate_mean_function: empty grid");
    }
    config.validate();
    Matrix table(static_cast<Eigen::Index>(grid.size()), config.k);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        SimulationConfig row = config;
        row.theta = grid[i];
        row.stream = mean_function_row_stream(config.stream, i);
        const auto parts = map_chunks(row, [&](std::uint64_t begin, std::uint64_t end) {
            StreamingMoments acc(row.k, 0);
            const Vector none(0);
            for_each_sample(row, begin, end,
                            [&](std::uint64_t, const Vector& y) { acc.push(estimator(y), none); });
            return acc;
        });
        StreamingMoments total(row.k, 0);
        for (const auto& part : parts) {
            total.merge(part);
        }
        table.row(static_cast<Eigen::Index>(i)) = total.mean_a().transpose();
    }
    return table;
}

inline Matrix tabulate_mean_function(EstimatorKind kind, const std::vector<double>& grid,
                                     const SimulationConfig& config) {
    return tabulate_mean_function(KindEstimator{kind}, grid, config);
}

}  // namespace shrinkinfo
