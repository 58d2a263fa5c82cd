#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qrng/entropy.hpp"

using qrng::Rational;

TEST(PoissonEntropy, FrozenOracleValues) {
    // Direct -sum p log2 p, computed independently and cross-checked at 30 digits.
    EXPECT_EQ(qrng::poisson_entropy_exact(0.0), 0.0);
    EXPECT_NEAR(qrng::poisson_entropy_exact(1.0), 1.8824894320, 1e-9);
    EXPECT_NEAR(qrng::poisson_entropy_exact(0.1), 0.4813941481, 1e-9);
    EXPECT_NEAR(qrng::poisson_entropy_exact(410.0), 6.3865420455, 1e-8);
    EXPECT_NEAR(qrng::poisson_entropy_exact(410.0), 6.4, 0.05);
}

TEST(PoissonEntropy, ExactSeriesMatchesDirectSummation) {
    for (double n : {0.1, 1.0, 5.0, 20.0, 100.0}) {
        EXPECT_NEAR(qrng::poisson_entropy_exact(n), qrng::oracle::direct_poisson_entropy(n), 1e-9) << n;
    }
}

TEST(PoissonEntropy, AsymptoticAgreesAboveFiveHundred) {
    for (double n = 500.0; n <= 1000.0; n += 25.0) {
        EXPECT_LT(std::fabs(qrng::poisson_entropy_exact(n) - qrng::poisson_entropy_asymptotic(n)), 1e-3) << n;
    }
}

TEST(PoissonEntropy, StrictlyIncreasing) {
    double previous = -1.0;
    for (double n = 0.0; n <= 3000.0; n = n < 1 ? n + 0.05 : n * 1.3) {
        const double h = qrng::poisson_entropy_exact(n);
        EXPECT_GT(h, previous) << n;
        previous = h;
    }
}

TEST(PoissonEntropy, LargeMeansStayFinite) {
    const double h = qrng::poisson_entropy_exact(1.0e6);
    EXPECT_NEAR(h, qrng::poisson_entropy_asymptotic(1.0e6), 1e-6);
    EXPECT_THROW(qrng::poisson_entropy_exact(-1.0), std::invalid_argument);
    EXPECT_THROW(qrng::poisson_entropy_exact(2.0e6), std::invalid_argument);
}

TEST(PoissonEntropy, AsymptoticClosedForm) {
    EXPECT_NEAR(qrng::poisson_entropy_asymptotic(410.0), 6.387, 1e-3);
    EXPECT_NEAR(qrng::poisson_entropy_asymptotic(1.5e4), 8.98, 5e-3);
    EXPECT_NEAR(qrng::poisson_entropy_asymptotic(1.0 / (2.0 * std::numbers::pi * std::numbers::e)), 0.0, 1e-14);
    EXPECT_THROW(qrng::poisson_entropy_asymptotic(0.0), std::invalid_argument);
}

TEST(EntropyReport, PublishedOperatingPoints) {
    const auto nokia = qrng::entropy_report(410.0, 10);
    EXPECT_EQ(nokia.method, qrng::EntropyMethod::exact_series);
    EXPECT_NEAR(nokia.s, 0.64, 0.01);
    EXPECT_NEAR(nokia.h_quantum, 6.4, 0.1);

    const auto atik = qrng::entropy_report(1.5e4, 16);
    EXPECT_EQ(atik.method, qrng::EntropyMethod::asymptotic);
    EXPECT_NEAR(atik.s, 0.56, 0.01);
    EXPECT_NEAR(atik.h_quantum, 8.9, 0.1);

    const auto dark = qrng::entropy_report(0.0, 8);
    EXPECT_EQ(dark.s, 0.0);
    EXPECT_EQ(dark.h_quantum, 0.0);
    EXPECT_THROW(qrng::entropy_report(10.0, 0), std::invalid_argument);
}

TEST(Rational, ArithmeticAndConversion) {
    EXPECT_EQ(Rational::from_double(0.64), Rational(16, 25));
    EXPECT_EQ(Rational::from_double(-390.0), Rational(-390));
    EXPECT_EQ(Rational::from_double(0.5), Rational(1, 2));
    EXPECT_EQ(Rational(2, 4), Rational(1, 2));
    EXPECT_EQ(Rational(1, -2), Rational(-1, 2));
    EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
    EXPECT_EQ(Rational(-7, 2).floor(), -4);
    EXPECT_EQ(Rational(7, 2).floor(), 3);
    EXPECT_LT(Rational(1, 3), Rational(1, 2));
    const double x = 0.638654204552;
    EXPECT_NEAR(Rational::from_double(x).to_double(), x, 1e-11);
}

TEST(EpsilonBound, WorkedExamples) {
    EXPECT_EQ(qrng::epsilon_bound(0.64, 2000, 500), Rational(-390));
    EXPECT_EQ(qrng::epsilon_bound(0.5, 4, 1), Rational(-1, 2));
    EXPECT_THROW(qrng::epsilon_bound(1.0, 100, 100), std::invalid_argument);  // k == l
    EXPECT_THROW(qrng::epsilon_bound(0.25, 100, 25), std::domain_error);     // zero margin
    EXPECT_THROW(qrng::epsilon_bound(0.0, 100, 10), std::invalid_argument);
    EXPECT_THROW(qrng::epsilon_bound(1.5, 100, 10), std::invalid_argument);
}

TEST(EpsilonBound, TrialsFigure) {
    const auto plan = qrng::plan_extractor(0.64, -390.0, 2000);
    EXPECT_NEAR(plan.log10_trials(), 117.4, 0.05);
}

TEST(EpsilonBound, LinearInMargin) {
    // Doubling s*l and k doubles |log2 epsilon|.
    for (std::size_t l : {100u, 640u, 2000u}) {
        for (std::size_t k : {10u, 37u}) {
            const auto base = qrng::epsilon_bound(Rational(1, 2), l, k);
            const auto doubled = qrng::epsilon_bound(Rational(1, 2), 2 * l, 2 * k);
            EXPECT_EQ(doubled, base * Rational(2));
        }
    }
}

TEST(PlanExtractor, WorkedExamples) {
    const auto p = qrng::plan_extractor(0.64, -390.0, 2000);
    EXPECT_EQ(p.k, 500u);
    EXPECT_DOUBLE_EQ(p.compression(), 4.0);
    EXPECT_EQ(p.log2_epsilon, Rational(-390));

    EXPECT_EQ(qrng::plan_extractor(0.64, -100.0, 2000).k, 1080u);
    EXPECT_THROW(qrng::plan_extractor(0.1, -100.0, 100), std::domain_error);
    EXPECT_THROW(qrng::plan_extractor(0.5, 1.0, 100), std::invalid_argument);
}

TEST(PlanExtractor, AchievedExponentNeverWorseThanTarget) {
    for (double s : {0.3, 0.5, 0.56, 0.64, 0.9}) {
        for (double target : {-10.0, -33.3, -100.0, -250.5}) {
            for (std::size_t l : {1000u, 2000u, 4096u}) {
                try {
                    const auto p = qrng::plan_extractor(s, target, l);
                    EXPECT_LE(p.log2_epsilon, Rational::from_double(target));
                    EXPECT_EQ(p.log2_epsilon, qrng::epsilon_bound(s, l, p.k));
                } catch (const std::domain_error&) {
                    // infeasible for this (s, l)
                    EXPECT_LE(s * static_cast<double>(l) + 2 * target, 1.0);
                }
            }
        }
    }
}

TEST(EntropyJson, FieldsMirrorReports) {
    const nlohmann::json r = qrng::entropy_report(410.0, 10);
    EXPECT_EQ(r.at("method"), "exact-series");
    EXPECT_EQ(r.at("bit_depth"), 10);
    const nlohmann::json p = qrng::plan_extractor(0.64, -390.0, 2000);
    EXPECT_EQ(p.at("k"), 500);
    EXPECT_EQ(p.at("log2_epsilon_exact"), "-390");
}
