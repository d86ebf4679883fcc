#include "doctest.h"

#include <cmath>

#include "flab/errors.hpp"
#include "flab/experiments.hpp"

using namespace flab;

namespace {

HardyExpr P(const char *s) { return HardyExpr::parse(s); }

const Coefficient sqrt2 = Coefficient::constant(Constant::sqrt2);
const Coefficient golden = Coefficient::constant(Constant::phi);

CorrelationQuery Q(std::vector<int> shifts, std::vector<int> signs) { return {std::move(shifts), std::move(signs), 1}; }

double brute_arcs(double u, double v, double s1, double s2)
{
    auto in = [&](double x) {
        x -= std::floor(x);
        return u <= x && x < v;
    };
    const int m = 200000;
    int hit = 0;
    for (int i = 0; i < m; ++i) {
        const double x = (i + 0.5) / m;
        hit += in(x) && in(x + s1) && in(x + s2);
    }
    return static_cast<double>(hit) / m;
}

} // namespace

TEST_CASE("arc intersections")
{
    CHECK(arc_intersection(0.0, 1.0, 0.3, 0.7) == 1.0);
    CHECK(arc_intersection(0.2, 0.5, 0.0, 0.0) == doctest::Approx(0.3));
    CHECK(arc_intersection(0.0, 0.25, 0.5, 0.0) == 0.0);
    for (auto [u, v, s1, s2] : std::vector<std::array<double, 4>>{
             {0.0, 1.0 / 3, 0.1, 0.2}, {0.4, 0.9, 0.75, 0.05}, {0.1, 0.6, 0.45, 0.9}, {0.8, 1.0, 0.95, 0.1}})
        CHECK(std::fabs(arc_intersection(u, v, s1, s2) - brute_arcs(u, v, s1, s2)) <= 2e-5);
}

TEST_CASE("orthogonality")
{
    const auto scheme = AveragingScheme::full(100000);
    for (const auto &w : {WeightSpec::bernoulli(3), WeightSpec::exp_linear(sqrt2),
                          WeightSpec::riemann_sample(golden, 0.0, 0.5)}) {
        auto r = ortho_test(P("t^(3/2)"), w, scheme, 0.02);
        CHECK(r.verdict.pass);
        CHECK(r.verdict.experiment == "ortho");
    }
    auto f = ortho_test(P("t^(3/2)"), WeightSpec::exp_quadratic(sqrt2), scheme, 0.02, sqrt2);
    CHECK(f.verdict.pass);
    CHECK_NOTHROW(ortho_test(P("t*log(t)"), WeightSpec::bernoulli(0), AveragingScheme::full(1000), 0.1));
    CHECK_THROWS_AS(ortho_test(P("t*log(t)^(1/2)"), WeightSpec::bernoulli(0), scheme, 0.02), HypothesisUnmet);
    CHECK_THROWS_AS(ortho_test(P("sqrt2*t^2"), WeightSpec::bernoulli(0), scheme, 0.02), HypothesisUnmet);
    CHECK_THROWS_AS(ortho_test(P("log(t)"), WeightSpec::bernoulli(0), scheme, 0.02), HypothesisUnmet);
}

TEST_CASE("dilation invariance")
{
    const auto scheme = AveragingScheme::full(100000);
    HardyPhase src(P("t^(3/2)"));
    auto r = sst_invariance(src, {Q({0, 1}, {1, -1}), Q({0, 1, 2}, {1, -1, 1})}, {1, 2, 3}, scheme, 0.02);
    CHECK(r.rows.size() == 2);
    CHECK(r.rows[0].values.size() == 3);
    CHECK(r.verdict.pass);
    // e(sqrt2 n^2): the second difference is the constant e(2 sqrt2 r^2)
    HardyPhase quad(P("sqrt2*t^2"));
    auto neg = sst_invariance(quad, {Q({2, 1, 1, 0}, {1, -1, -1, 1})}, {1, 2}, AveragingScheme::full(10000), 0.02);
    CHECK(std::abs(neg.rows[0].values[0] - unit(std::fmod(2 * std::sqrt(2.0), 1.0))) <= 1e-9);
    CHECK(neg.deviation >= 0.1);
    CHECK_FALSE(neg.verdict.pass);
    CHECK_THROWS_AS(sst_invariance(src, {Q({0}, {1})}, {}, scheme, 0.02), BadQuery);
}

TEST_CASE("multiple ergodic averages")
{
    const auto scheme = AveragingScheme::full(100000);
    const RotationNumber at(golden), as(sqrt2);
    auto a = P("t^(3/2)");
    auto trivial = multi_ergodic_average(at, as, 0, 0, a, scheme, 1e-12);
    CHECK(trivial.series.final().value == std::complex<double>(1.0, 0.0));
    CHECK(trivial.verdict.pass);
    CHECK(multi_ergodic_average(at, as, 1, 0, a, scheme, 1e-4).verdict.pass);
    CHECK(multi_ergodic_average(at, as, 0, 1, a, scheme, 0.02).verdict.pass);
    CHECK(multi_ergodic_average(at, as, 2, -1, a, scheme, 0.02).verdict.pass);
    CHECK_THROWS_AS(multi_ergodic_average(at, as, 1, 1, P("t*log(t)"), scheme, 0.02), HypothesisUnmet);
    CHECK_THROWS_AS(multi_ergodic_average(at, as, 1, 1, P("t^2"), scheme, 0.02), HypothesisUnmet);
}

TEST_CASE("recurrence")
{
    const auto scheme = AveragingScheme::full(100000);
    const RotationNumber at(golden), as(sqrt2);
    auto r = recurrence_average(at, as, 0.0, 1.0 / 3, P("t^(3/2)"), scheme, 0.01, 0.005);
    CHECK(r.bound == doctest::Approx(1.0 / 27));
    CHECK(r.verdict.pass);
    // a frozen second time leaves m(A n (A - n alpha)) with mean m(A)^2
    auto frozen = recurrence_average(at, as, 0.0, 1.0 / 3, [](std::int64_t) { return std::int64_t{0}; }, scheme,
                                     0.01, 0.005);
    CHECK(frozen.series.final().value.real() == doctest::Approx(1.0 / 9).epsilon(1e-2));
    CHECK_FALSE(frozen.verdict.pass);
    CHECK_THROWS_AS(recurrence_average(at, as, 0.5, 0.2, P("t^(3/2)"), scheme, 0.01, 0.005), std::invalid_argument);
}

TEST_CASE("equidistribution along a beatty sequence")
{
    auto r = equidist_along(P("t^(3/2)"), BeattySequence(golden, 0.0), RotationNumber(sqrt2), 4, 1000000, 0.05, 0.01);
    CHECK(r.weyl.size() == 4);
    CHECK(r.residues.size() == 4);
    for (const auto &[q, freq] : r.residues) {
        double sum = 0.0;
        for (double x : freq)
            sum += x;
        CHECK(freq.size() == static_cast<std::size_t>(q));
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(r.verdict.pass);
    // alpha = 1/2 puts e(2 [x] / 2) at 1
    auto neg = equidist_along(P("t^(3/2)"), BeattySequence(golden, 0.0), RotationNumber(0.5), 2, 1000, 0.02, 0.01);
    CHECK(neg.floor_sup == doctest::Approx(1.0));
    CHECK_FALSE(neg.verdict.pass);
}

TEST_CASE("joint correlations factor")
{
    const auto scheme = AveragingScheme::full(100000);
    auto a = P("t^(3/2)");
    auto r = joint_factorization_test(a, sqrt2, Q({0}, {1}), Q({0, 1}, {1, -1}), scheme, 0.02);
    CHECK(r.verdict.pass);
    auto pair = joint_factorization_test(a, sqrt2, Q({0, 1}, {1, -1}), Q({0, 1}, {1, -1}), scheme, 0.02);
    CHECK(pair.verdict.pass);
    CHECK(pair.deviation == std::abs(pair.joint - pair.product));
    CHECK_THROWS_AS(joint_factorization_test(a, Coefficient(Rational(3, 2)), Q({0}, {1}), Q({0}, {1}), scheme, 0.02),
                    HypothesisUnmet);
    CHECK_THROWS_AS(joint_factorization_test(P("sqrt2*t^2"), sqrt2, Q({0}, {1}), Q({0}, {1}), scheme, 0.02),
                    HypothesisUnmet);
}

TEST_CASE("correlations of floor sequences")
{
    auto r = floor_sequence_correlation(P("t^(3/2)"), sqrt2, Q({0, 1}, {1, -1}), AveragingScheme::full(100000), 0.02);
    CHECK(r.crosscheck <= 1e-12);
    CHECK(r.verdict.pass);
    CHECK_THROWS_AS(floor_sequence_correlation(P("t^(3/2)"), Coefficient(2), Q({0}, {1}),
                                               AveragingScheme::full(1000), 0.02),
                    HypothesisUnmet);
}
