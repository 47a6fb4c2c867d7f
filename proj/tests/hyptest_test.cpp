#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "shrinkinfo/hyptest.hpp"

namespace si = shrinkinfo;

namespace {

si::SimulationConfig null_config(std::uint64_t n, std::uint64_t seed = 1) {
    si::SimulationConfig cfg;
    cfg.theta = 1.25;
    cfg.n_samples = n;
    cfg.seed = seed;
    cfg.n_workers = 2;
    return cfg;
}

si::NullCalibration synthetic_calibration(std::size_t n) {
    si::NullCalibration c;
    c.sorted_null.resize(n);
    std::iota(c.sorted_null.begin(), c.sorted_null.end(), 0.0);
    c.n_null = n;
    return c;
}

// Upper tail of the noncentral chi-square as a Poisson mixture of central
// chi-square tails; independent of the library's noncentral implementation.
double noncentral_upper_tail_series(double x, double dof, double ncp) {
    const double half = ncp / 2.0;
    double total = 0.0;
    for (int j = 0; j < 400; ++j) {
        const double log_weight = -half + j * std::log(half) - std::lgamma(j + 1.0);
        total += std::exp(log_weight) * boost::math::gamma_q(dof / 2.0 + j, x / 2.0);
    }
    return total;
}

}  // namespace

TEST(TestStatistic, ClosedFormValues) {
    EXPECT_EQ(si::test_statistic(si::EstimatorKind::ml, si::Vector::Constant(14, 1.25), 1.25), 0.0);
    EXPECT_DOUBLE_EQ(si::test_statistic(si::EstimatorKind::ml, si::Vector::Constant(14, 2.0), 1.25), 7.875);
    // ||y||^2 = k - 2 sends the JS estimate to the origin.
    const si::Vector y = si::Vector::Constant(14, std::sqrt(12.0 / 14.0));
    EXPECT_NEAR(si::test_statistic(si::EstimatorKind::js, y, 1.25), 21.875, 1e-12);
    EXPECT_THROW(si::test_statistic(si::EstimatorKind::js, si::Vector::Zero(14), 1.25), si::DomainError);
}

TEST(EmpiricalCriticalValue, OrderStatisticRule) {
    std::vector<double> sorted(99);
    std::iota(sorted.begin(), sorted.end(), 1.0);  // 1..99
    EXPECT_EQ(si::empirical_critical_value(sorted, 0.05), 95.0);  // ceil(0.95 * 100) - 1 = 94
    EXPECT_EQ(si::empirical_critical_value(sorted, 0.5), 50.0);
    EXPECT_EQ(si::empirical_critical_value(sorted, 0.001), 99.0);  // clamped
    EXPECT_EQ(si::empirical_critical_value(sorted, 0.999), 1.0);
}

TEST(CalibrateNull, MlCriticalValueMatchesChiSquareQuantile) {
    const auto calib = si::calibrate_null(si::EstimatorKind::ml, null_config(1'000'000, 41), {0.01, 0.05});
    const boost::math::chi_squared chi2(14);
    const double q05 = boost::math::quantile(boost::math::complement(chi2, 0.05));
    EXPECT_NEAR(q05, 23.685, 5e-4);
    // Quantile standard error at n = 10^6 is about 0.02.
    EXPECT_NEAR(calib.critical_value(0.05), q05, 0.1);
    EXPECT_NEAR(calib.critical_value(0.01), boost::math::quantile(boost::math::complement(chi2, 0.01)), 0.2);
    EXPECT_TRUE(std::is_sorted(calib.sorted_null.begin(), calib.sorted_null.end()));
    EXPECT_EQ(calib.n_null, 1'000'000u);
    EXPECT_EQ(calib.mu0, 1.25);
}

TEST(CalibrateNull, RejectionFractionMatchesAlpha) {
    for (auto kind : {si::EstimatorKind::ml, si::EstimatorKind::js}) {
        const auto calib = si::calibrate_null(kind, null_config(50'000, 42), {0.01, 0.05, 0.2});
        for (const auto& [alpha, critical] : calib.critical_values) {
            const auto above = calib.sorted_null.end() -
                               std::upper_bound(calib.sorted_null.begin(), calib.sorted_null.end(), critical);
            const double fraction = static_cast<double>(above) / calib.n_null;
            EXPECT_NEAR(fraction, alpha, 2.0 * std::sqrt(alpha / calib.n_null));
            EXPECT_NEAR(fraction, alpha, 2.0 / std::sqrt(static_cast<double>(calib.n_null)));
            EXPECT_TRUE(std::isfinite(critical));
            EXPECT_GT(critical, 0.0);
        }
    }
}

TEST(CalibrateNull, Errors) {
    EXPECT_THROW(si::calibrate_null(si::EstimatorKind::ml, null_config(9'999), {0.01}), si::NumericalError);
    EXPECT_NO_THROW(si::calibrate_null(si::EstimatorKind::ml, null_config(10'000), {0.01}));
    EXPECT_THROW(si::calibrate_null(si::EstimatorKind::ml, null_config(10'000), {0.0}), std::invalid_argument);
    EXPECT_THROW(si::calibrate_null(si::EstimatorKind::ml, null_config(10'000), {1.0}), std::invalid_argument);
    EXPECT_THROW(si::calibrate_null(si::EstimatorKind::ml, null_config(10'000), {}), std::invalid_argument);
}

TEST(Power, NullAlternativeRejectsAtTheLevel) {
    const auto cfg = null_config(200'000, 43);
    for (auto kind : {si::EstimatorKind::ml, si::EstimatorKind::js}) {
        const auto calib = si::calibrate_null(kind, cfg, {0.01, 0.05});
        for (const auto& cell : si::power(kind, 1.25, calib, cfg)) {
            const double se = std::sqrt(2.0 * cell.alpha * (1.0 - cell.alpha) / cfg.n_samples);
            EXPECT_NEAR(cell.power, cell.alpha, 3.0 * se);
            EXPECT_EQ(cell.n, cfg.n_samples);
        }
    }
}

TEST(Power, RejectsMismatchedCalibration) {
    const auto calib = si::calibrate_null(si::EstimatorKind::ml, null_config(10'000), {0.05});
    EXPECT_THROW(si::power(si::EstimatorKind::js, 1.0, calib, null_config(10'000)), std::invalid_argument);
}

TEST(Power, InvariantUnderIncreasingTransforms) {
    const auto cfg = null_config(100'000, 44);
    auto expish = [](double t) { return std::exp(t / 8.0); };
    auto cubic = [](double t) { return t * t * t + t; };
    for (auto kind : {si::EstimatorKind::ml, si::EstimatorKind::js}) {
        const auto plain = si::calibrate_null(kind, cfg, {0.01, 0.05});
        const auto via_exp = si::calibrate_null(kind, cfg, {0.01, 0.05}, expish);
        const auto via_cubic = si::calibrate_null(kind, cfg, {0.01, 0.05}, cubic);
        for (double theta : {0.0, 1.5, 2.5}) {
            const auto a = si::power(kind, theta, plain, cfg);
            const auto b = si::power(kind, theta, via_exp, cfg, expish);
            const auto c = si::power(kind, theta, via_cubic, cfg, cubic);
            for (std::size_t j = 0; j < a.size(); ++j) {
                EXPECT_EQ(a[j].exceed_count, b[j].exceed_count);
                EXPECT_EQ(a[j].exceed_count, c[j].exceed_count);
            }
        }
    }
}

TEST(Semitail, AddOneTailRule) {
    const auto calib = synthetic_calibration(999);  // values 0..998
    // t = 0: all 999 at least t -> p = 1, s = 0.
    EXPECT_EQ(si::semitail(0.0, calib), 0.0);
    // t = 749: 250 at least t -> p = 251 / 1000.
    EXPECT_DOUBLE_EQ(si::semitail(749.0, calib), -std::log2(0.251));
    // Beyond the largest null value: p = 1 / (n + 1), finite.
    EXPECT_DOUBLE_EQ(si::semitail(1e9, calib), std::log2(1000.0));
    // Median: tail area one half.
    EXPECT_NEAR(si::semitail(499.0, calib), 1.0, 0.01);
    // Exactly a quarter of the tail: (249 + 1) / 1000.
    EXPECT_DOUBLE_EQ(si::semitail(750.0, calib), 2.0);
    // One unit apart halves the tail area.
    EXPECT_DOUBLE_EQ(si::semitail(875.0, calib) - si::semitail(750.0, calib), 1.0);
}

TEST(Semitail, MonotoneInTheStatistic) {
    const auto calib = si::calibrate_null(si::EstimatorKind::js, null_config(20'000, 45), {0.05});
    double previous = -1.0;
    for (double t = 0.0; t < 80.0; t += 0.37) {
        const double s = si::semitail(t, calib);
        EXPECT_GE(s, previous);
        EXPECT_GE(s, 0.0);
        previous = s;
    }
}

TEST(PairedSemitail, SharedDrawsAndValidation) {
    const auto cfg = null_config(20'000, 46);
    const auto js = si::calibrate_null(si::EstimatorKind::js, cfg, {0.05});
    const auto ml = si::calibrate_null(si::EstimatorKind::ml, cfg, {0.05});
    const auto pairs = si::paired_semitail(0.5, 50, js, ml, cfg);
    ASSERT_EQ(pairs.size(), 50u);
    const auto cell = cfg.for_cell(si::Purpose::figure, 0.5);
    for (const auto& p : pairs) {
        auto draw_cfg = cell;
        draw_cfg.n_samples = 50;
        const si::Vector y = si::draw_sample(draw_cfg, p.sample_index);
        EXPECT_EQ(p.s_ml, si::semitail(si::test_statistic(si::EstimatorKind::ml, y, 1.25), ml));
        EXPECT_EQ(p.s_js, si::semitail(si::test_statistic(si::EstimatorKind::js, y, 1.25), js));
        EXPECT_EQ(p.shrinkage, si::shrinkage_factor(y, 14));
    }
    EXPECT_THROW(si::paired_semitail(0.5, 10, ml, js, cfg), std::invalid_argument);
    EXPECT_THROW(si::paired_semitail(0.5, 0, js, ml, cfg), std::invalid_argument);
}

TEST(PairedSemitail, MlIsMoreExtremeAtThetaTwo) {
    const auto cfg = null_config(1'000'000, 47);
    const auto js = si::calibrate_null(si::EstimatorKind::js, cfg, {0.05});
    const auto ml = si::calibrate_null(si::EstimatorKind::ml, cfg, {0.05});
    const auto pairs = si::paired_semitail(2.0, 100, js, ml, cfg);
    const auto above = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.s_ml > p.s_js; });
    EXPECT_GE(above, 95);
}

TEST(MlPowerOracle, ExactAtTheNullAndSymmetric) {
    EXPECT_EQ(si::ml_power_oracle(1.25, 0.05, 14), 0.05);
    EXPECT_EQ(si::ml_power_oracle(1.25, 0.01, 14), 0.01);
    for (double delta : {0.1, 0.25, 0.75, 1.25}) {
        for (double alpha : {0.01, 0.05}) {
            EXPECT_DOUBLE_EQ(si::ml_power_oracle(1.25 - delta, alpha, 14), si::ml_power_oracle(1.25 + delta, alpha, 14));
        }
    }
    EXPECT_THROW(si::ml_power_oracle(1.0, 0.0, 14), std::invalid_argument);
}

TEST(MlPowerOracle, MatchesPoissonMixtureSeriesAndPublishedValue) {
    const boost::math::chi_squared chi2(14);
    for (double alpha : {0.01, 0.05}) {
        const double q = boost::math::quantile(boost::math::complement(chi2, alpha));
        for (double theta : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5}) {
            const double ncp = 14.0 * (theta - 1.25) * (theta - 1.25);
            EXPECT_NEAR(si::ml_power_oracle(theta, alpha, 14), noncentral_upper_tail_series(q, 14.0, ncp), 1e-10);
        }
    }
    // The published figure is itself a simulation at 10^6 draws.
    EXPECT_NEAR(si::ml_power_oracle(2.0, 0.05, 14), 0.369, 0.0015);
    EXPECT_NEAR(si::ml_exceedance_oracle(1.25, 23.685, 14), 0.05, 1e-4);
}
