#include "doctest.h"

#include <cmath>

#include "flab/errors.hpp"
#include "flab/measures.hpp"

using namespace flab;

namespace {

HardyExpr P(const char *s) { return HardyExpr::parse(s); }

const double phi = (1.0 + std::sqrt(5.0)) / 2.0;

AveragingScheme at(std::vector<std::int64_t> cps) { return AveragingScheme::full(cps.back(), CheckpointRule::explicit_points(cps)); }

double circ(double x, double y)
{
    double d = std::fabs(x - y);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

} // namespace

TEST_CASE("argument checks")
{
    auto src = make_circle_source([](std::int64_t) { return 0.25; });
    CHECK_THROWS_AS(build_empirical_measure(*src, at({1000}), 1000), std::invalid_argument);
    CHECK_THROWS_AS(build_empirical_measure(*src, at({1000}), 1 << 17), std::invalid_argument);
    CHECK_THROWS_AS(build_empirical_measure(*src, at({1000}), 1024, 65), std::invalid_argument);
}

TEST_CASE("constant source")
{
    auto src = make_circle_source([](std::int64_t) { return 0.25; });
    auto m = build_empirical_measure(*src, at({1000})).back().measure;
    CHECK(m.total == 1000);
    CHECK(m.bins[256] == 1000);
    CHECK(m.coefficient(1) == std::complex<double>(0.0, 1.0));
    CHECK(m.coefficient(-1) == std::complex<double>(0.0, -1.0));
    CHECK(m.coefficient(0) == 1.0);
    CHECK_THROWS_AS(m.coefficient(17), FourierOutOfRange);
    CHECK(concentration_test(m, 0.25, 0.01) == 1.0);
    CHECK_FALSE(uniformity_test(m, 5, 0.05).pass);
    CHECK(uniformity_test(m, 5, 0.05).worst_value == doctest::Approx(1.0));
    for (int c : {2, 10, 100})
        CHECK_FALSE(density_bound_check(m, c).pass);
}

TEST_CASE("measure invariants")
{
    HardyFrac src(P("t^(3/2)"));
    auto ms = build_empirical_measure(src, AveragingScheme::full(300000));
    for (const auto &[n, m] : ms) {
        std::int64_t sum = 0;
        for (auto b : m.bins) {
            CHECK(b <= m.total);
            sum += b;
        }
        CHECK(sum == m.total);
        CHECK(m.total == n);
        for (int k = 1; k <= m.max_frequency(); ++k) {
            CHECK(std::abs(m.coefficient(k)) <= 1.0 + 1e-12);
            CHECK(m.coefficient(-k) == std::conj(m.coefficient(k)));
            // bin centers move each sample by at most 1 / (2B)
            CHECK(std::abs(m.coefficient(k) - m.coefficient_from_bins(k)) <=
                  M_PI * k / m.bin_count() + 1e-12);
        }
    }
}

TEST_CASE("merging disjoint ranges")
{
    HardyFrac whole(P("sqrt3*t^2 + t^(1/2)"));
    const std::int64_t n1 = 70001, n2 = 150000;
    auto tail = make_circle_source([&](std::int64_t n) { return whole.at(n); }, whole.start() + n1);
    auto a = build_empirical_measure(whole, at({n1})).back().measure;
    auto b = build_empirical_measure(*tail, at({n2 - n1})).back().measure;
    auto c = build_empirical_measure(whole, at({n2})).back().measure;
    auto m = a.merged(b);
    CHECK(m.total == c.total);
    CHECK(m.bins == c.bins);
    for (int k = 1; k <= 16; ++k)
        CHECK(std::abs(m.coefficient(k) - c.coefficient(k)) <= 1e-13);
}

TEST_CASE("golden rotation")
{
    auto src = make_circle_source([](std::int64_t n) { return std::fmod(static_cast<double>(n) * phi, 1.0); });
    auto m = build_empirical_measure(*src, AveragingScheme::full(1000000)).back().measure;
    for (int k = 1; k <= 8; ++k) {
        const double d = std::fabs(k * phi - std::round(k * phi));
        CHECK(std::abs(m.coefficient(k)) <= 1.0 / (2e6 * d) + 1e-9);
        CHECK(std::abs(m.coefficient(k)) <= 1e-3);
    }
    CHECK(uniformity_test(m, 8, 1e-2).pass);
    CHECK(density_bound_check(m, 1.2).pass);
    CHECK(concentration_test(m, 0.3, 0.05) == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("log n + 1 against a brute-force histogram" * doctest::timeout(600))
{
    const auto a = P("t*log(t)");
    auto ms = lambda_from_expr(a, at({1000000, 10000000}));
    const auto &m = ms.back().measure;
    // direct counts with libm, n = 2 .. 1e7 + 1
    std::vector<std::int64_t> bins(1024);
    for (std::int64_t n = 2; n < 10000002; ++n) {
        const double x = std::log(static_cast<double>(n)) + 1.0;
        bins[static_cast<std::size_t>((x - std::floor(x)) * 1024)]++;
    }
    std::int64_t moved = 0;
    for (std::size_t i = 0; i < bins.size(); ++i)
        moved += std::abs(bins[i] - m.bins[i]);
    CHECK(moved <= 10);
    double sup = 0.0;
    for (int i = 0; i < 1024; i += 8)
        sup = std::max(sup, m.mass(i, i + 8) * 128.0);
    CHECK(sup <= 1.7);
    CHECK(density_bound_check(m, 2.0).pass);
    CHECK(density_bound_check(m, 2.0).ratio >= 1.4);
}

TEST_CASE("lambda of t^(3/2) is uniform at N = 1e7" * doctest::timeout(600))
{
    auto m = lambda_from_expr(P("t^(3/2)"), AveragingScheme::full(10000000)).back().measure;
    CHECK(uniformity_test(m, 5, 0.05).pass);
}

TEST_CASE("lambda of sqrt2 t^2 is a point mass")
{
    auto m = lambda_from_expr(P("sqrt2*t^2"), AveragingScheme::full(100000)).back().measure;
    CHECK(concentration_test(m, std::sqrt(2.0) - 1.0, 1e-3) >= 0.99);
    CHECK(std::abs(m.coefficient(1) - std::polar(1.0, 2 * M_PI * std::sqrt(2.0))) <= 1e-12);
    CHECK_THROWS_AS(lambda_from_expr(P("1/2*t^2 + t^(2/3)"), AveragingScheme::full(1000)), HypothesisUnmet);
}

TEST_CASE("lambda of t log t depends on the ladder")
{
    std::vector<std::int64_t> l1, l2;
    for (int k = 10; k <= 16; ++k) {
        l1.push_back(std::llround(std::exp(k)));
        l2.push_back(std::llround(std::exp(k + 0.5)));
    }
    auto a = P("t*log(t)");
    auto m1 = lambda_from_expr(a, at(l1)).back().measure;
    auto m2 = lambda_from_expr(a, at(l2)).back().measure;
    CHECK(std::abs(m1.coefficient(1) - m2.coefficient(1)) >= 0.05);
    CHECK(density_bound_check(m1, 2.0).pass);
    CHECK(density_bound_check(m2, 2.0).pass);
    // density e^(x + theta) / (e - 1) gives |lambda^(1)| = 1 / |1 + 2 pi i|
    CHECK(std::abs(m1.coefficient(1)) == doctest::Approx(1.0 / std::hypot(1.0, 2 * M_PI)).epsilon(0.02));
}

TEST_CASE("checkpoint search")
{
    auto c = P("log(t)^(1/2)");
    auto hits = find_checkpoint_times(c, 0.5, 0.01, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[1] == hits[0] + 1);
    for (auto n : hits)
        CHECK(circ(eval_frac(c, n).frac, 0.5) < 0.01);
    // (1.49, 1.51) maps to n in (9.21, 9.78), which holds no integer
    CHECK(hits[0] == static_cast<std::int64_t>(std::ceil(std::exp(2.49 * 2.49))));

    auto lg = find_checkpoint_times(P("log(t)"), 0.0, 1e-3, 4);
    for (auto n : lg) {
        CHECK(circ(std::log(static_cast<double>(n)), 0.0) < 1e-3);
        const double m = std::round(std::log(static_cast<double>(n)));
        CHECK(std::fabs(static_cast<double>(n) - std::exp(m)) <= 1e-3 * std::exp(m) + 1);
    }

    CHECK(find_checkpoint_times(P("1/4"), 0.25, 0.01, 2) == std::vector<std::int64_t>{2, 3});
    CHECK_THROWS_AS(find_checkpoint_times(P("1/4"), 0.75, 0.01, 2), SearchBudgetExceeded);
    CHECK_THROWS_AS(find_checkpoint_times(c, 0.5, 0.01, 3, 50), SearchBudgetExceeded);
    // bounded and decreasing: 1 + 1/t stays in (1, 1.5]
    CHECK(find_checkpoint_times(P("1 + t^(-1)"), 0.5, 0.1, 1).front() == 2);
    CHECK_THROWS_AS(find_checkpoint_times(P("1 + t^(-1)"), 0.7, 0.1, 1), SearchBudgetExceeded);
}

TEST_CASE("slow variation of (log t)^(1/2) at its crossings")
{
    auto c = P("log(t)^(1/2)");
    auto ts = find_crossing_reals(c, 0.5, 12);
    int checked = 0;
    for (double t : ts) {
        CHECK(circ(c.value(t), 0.5) <= 1e-9);
        if (std::log(t) < 48.0)
            continue;
        double worst = 0.0;
        for (int i = 0; i <= 64; ++i) {
            const double s = t * (0.5 + 0.5 * i / 64.0);
            worst = std::max(worst, std::fabs(c.value(t) - c.value(s)));
        }
        CHECK(worst <= 0.05);
        ++checked;
    }
    CHECK(checked >= 4);
}

TEST_CASE("case III concentrates at a found checkpoint" * doctest::timeout(600))
{
    // c = a' = log(t)^(1/10) + log(t)^(-9/10) / 10
    auto a = P("t*log(t)^(1/10)");
    REQUIRE(classify(a).case_id == Case::III);
    auto c = derivative_sequence(a, classify(a));
    auto n = find_checkpoint_times(c, 0.3, 0.005, 1).front();
    CHECK(n > 100000);
    auto m = lambda_from_expr(a, at({n - a.n_start() + 1})).back().measure;
    CHECK(concentration_test(m, 0.3, 0.05) >= 0.9);
}
