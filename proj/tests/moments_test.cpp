#include <random>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "shrinkinfo/mc.hpp"
#include "shrinkinfo/moments.hpp"

namespace si = shrinkinfo;

namespace {

using Pairs = std::vector<std::pair<si::Vector, si::Vector>>;

Pairs random_pairs(std::mt19937_64& gen, std::size_t n, int da, int db) {
    std::normal_distribution<double> normal(3.0, 2.0);
    Pairs pairs;
    for (std::size_t i = 0; i < n; ++i) {
        si::Vector a(da), b(db);
        for (int j = 0; j < da; ++j) a(j) = normal(gen);
        for (int j = 0; j < db; ++j) b(j) = 0.5 * a(j % da) + normal(gen);
        pairs.emplace_back(a, b);
    }
    return pairs;
}

// Two-pass textbook covariance.
si::Matrix two_pass_cov(const Pairs& pairs, bool first, bool second) {
    const auto n = static_cast<double>(pairs.size());
    si::Vector ma = si::Vector::Zero(pairs[0].first.size()), mb = si::Vector::Zero(pairs[0].second.size());
    for (const auto& [a, b] : pairs) {
        ma += a / n;
        mb += b / n;
    }
    const auto rows = first ? ma.size() : mb.size();
    const auto cols = second ? mb.size() : ma.size();
    si::Matrix c = si::Matrix::Zero(rows, cols);
    for (const auto& [a, b] : pairs) {
        const si::Vector x = first ? si::Vector(a - ma) : si::Vector(b - mb);
        const si::Vector y = second ? si::Vector(b - mb) : si::Vector(a - ma);
        c += x * y.transpose();
    }
    return c / (n - 1.0);
}

double rel_diff(const si::Matrix& a, const si::Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST(ScalarMoments, MatchesTwoPassAndMerges) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> normal(100.0, 3.0);
    std::vector<double> xs(5000);
    for (double& x : xs) x = normal(gen);
    double mean = 0.0;
    for (double x : xs) mean += x / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);

    si::ScalarMoments all, left, right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        all.push(xs[i]);
        (i < 1234 ? left : right).push(xs[i]);
    }
    left.merge(right);
    EXPECT_NEAR(all.mean(), mean, 1e-10);
    EXPECT_NEAR(all.variance(), ss / (xs.size() - 1), 1e-9);
    EXPECT_NEAR(left.mean(), all.mean(), 1e-10 * mean);
    EXPECT_NEAR(left.variance(), all.variance(), 1e-10 * all.variance());
    EXPECT_EQ(left.count(), all.count());
}

TEST(ScalarMoments, VarianceNeedsTwoObservations) {
    si::ScalarMoments m;
    m.push(1.0);
    EXPECT_THROW(m.variance(), si::NumericalError);
}

TEST(StreamingMoments, AgreesWithTwoPassCovariance) {
    std::mt19937_64 gen(2);
    const auto pairs = random_pairs(gen, 3000, 4, 3);
    const auto m = si::accumulate(pairs);
    EXPECT_LT(rel_diff(m.cov_aa(), two_pass_cov(pairs, true, false)), 1e-12);
    EXPECT_LT(rel_diff(m.cov_ab(), two_pass_cov(pairs, true, true)), 1e-12);
    EXPECT_LT(rel_diff(m.cov_bb(), two_pass_cov(pairs, false, true)), 1e-12);
}

TEST(StreamingMoments, IdenticalPairsHaveZeroCovariance) {
    Pairs pairs(100, {si::Vector::Constant(3, 0.7), si::Vector::Constant(2, -1.5)});
    const auto m = si::accumulate(pairs);
    EXPECT_TRUE(m.cov_aa().isZero(0.0));
    EXPECT_TRUE(m.cov_ab().isZero(0.0));
}

TEST(StreamingMoments, SelfPairingGivesTheSameCovariance) {
    std::mt19937_64 gen(3);
    Pairs pairs;
    for (auto& [a, b] : random_pairs(gen, 500, 5, 1)) pairs.emplace_back(a, a);
    const auto m = si::accumulate(pairs);
    EXPECT_TRUE(m.cov_ab().isApprox(m.cov_aa(), 1e-13));
}

TEST(StreamingMoments, MergeOfAnySplitMatchesOnePass) {
    std::mt19937_64 gen(4);
    std::uniform_int_distribution<std::size_t> cut_dist(1, 1999);
    const auto pairs = random_pairs(gen, 2000, 6, 6);
    const auto whole = si::accumulate(pairs);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t cut = cut_dist(gen);
        si::StreamingMoments left(6, 6), right(6, 6);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            (i < cut ? left : right).push(pairs[i].first, pairs[i].second);
        }
        left.merge(right);
        EXPECT_EQ(left.count(), whole.count());
        EXPECT_LT(rel_diff(left.mean_a(), whole.mean_a()), 1e-10);
        EXPECT_LT(rel_diff(left.cov_aa(), whole.cov_aa()), 1e-10);
        EXPECT_LT(rel_diff(left.cov_ab(), whole.cov_ab()), 1e-10);
        EXPECT_LT(rel_diff(left.cov_bb(), whole.cov_bb()), 1e-10);
    }
}

TEST(StreamingMoments, CovarianceIsSymmetricPositiveSemidefinite) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto pairs = random_pairs(gen, 3 + trial * 7, 8, 2);
        const si::Matrix c = si::accumulate(pairs).cov_aa();
        EXPECT_EQ(c, c.transpose());
        Eigen::SelfAdjointEigenSolver<si::Matrix> eig(c);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff());
    }
}

TEST(StreamingMoments, ErrorsOnMisuse) {
    si::StreamingMoments m(2, 2);
    EXPECT_THROW(m.push(si::Vector::Zero(3), si::Vector::Zero(2)), si::DimensionError);
    m.push(si::Vector::Zero(2), si::Vector::Zero(2));
    EXPECT_THROW(m.cov_aa(), si::NumericalError);
    si::StreamingMoments other(3, 2);
    EXPECT_THROW(m.merge(other), si::DimensionError);
    EXPECT_THROW(si::accumulate(Pairs{}), si::NumericalError);
}
