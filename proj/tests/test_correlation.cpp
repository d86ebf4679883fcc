#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "flab/correlation.hpp"
#include "flab/errors.hpp"

using namespace flab;

namespace {

HardyExpr P(const char *s) { return HardyExpr::parse(s); }

CorrelationQuery Q(std::vector<int> shifts, std::vector<int> signs, int r = 1) { return {shifts, signs, r}; }

// e(2 sqrt2), from a 40-digit mpmath evaluation
const std::complex<double> e_2sqrt2(0.4730700426878691, -0.8810248207123893);

bool same(std::complex<double> a, std::complex<double> b) { return a.real() == b.real() && a.imag() == b.imag(); }

} // namespace

TEST_CASE("query validation")
{
    CHECK_THROWS_AS(canonicalize(Q({}, {})), BadQuery);
    CHECK_THROWS_AS(canonicalize(Q({1, 2}, {1})), BadQuery);
    CHECK_THROWS_AS(canonicalize(Q({65}, {1})), BadQuery);
    CHECK_THROWS_AS(canonicalize(Q({1}, {2})), BadQuery);
    CHECK_THROWS_AS(canonicalize(Q({0, 1, 2, 3, 4, 5, 6, 7, 8}, {1, 1, 1, 1, 1, 1, 1, 1, 1})), BadQuery);
    CHECK_THROWS_AS(canonicalize(Q({1}, {1}, 0)), BadQuery);
}

TEST_CASE("canonical forms")
{
    CHECK(canonicalize(Q({0, 0}, {1, -1})).factors.empty());
    auto c = canonicalize(Q({2, 1, 1, 0}, {1, -1, -1, 1}));
    REQUIRE(c.factors.size() == 3);
    CHECK(c.factors[1].offset == 1);
    CHECK(c.factors[1].exponent == -2);
    CHECK_FALSE(c.negated);
    auto t = canonicalize(Q({7, 6, 6, 5}, {1, -1, -1, 1}));
    CHECK(t.factors == c.factors);
    auto n = canonicalize(Q({2, 1, 1, 0}, {-1, 1, 1, -1}));
    CHECK(n.factors == c.factors);
    CHECK(n.negated);
    auto d = canonicalize(Q({1, 0}, {1, -1}, 3));
    CHECK(d.factors == canonicalize(Q({3, 0}, {1, -1})).factors);
}

TEST_CASE("the acceptance query set")
{
    auto qs = exhaustive_queries(4, 5);
    CHECK(qs.size() == 14949); // multisets of size 1..4 from 22 (shift, sign) pairs
    std::set<std::vector<CanonicalQuery::Factor>> classes;
    for (const auto &q : qs)
        classes.insert(canonicalize(q).factors);
    CHECK(classes.size() == 1805); // independent enumeration, empty product included
}

TEST_CASE("trivial query is exactly one")
{
    HardyPhase src(P("t^(3/2)"));
    auto s = empirical_correlation(src, Q({0, 0}, {1, -1}), AveragingScheme::full(100000));
    for (const auto &p : s.points)
        CHECK(same(p.value, 1.0));
}

TEST_CASE("constant second difference of sqrt2 n^2")
{
    HardyPhase src(P("sqrt2*t^2"));
    auto s = empirical_correlation(src, Q({2, 1, 1, 0}, {1, -1, -1, 1}), AveragingScheme::full(1000000));
    for (const auto &p : s.points)
        if (p.n >= 1000)
            CHECK(std::abs(p.value - e_2sqrt2) <= 1e-9);
}

TEST_CASE("e(n^(3/2)) against a brute-force oracle")
{
    HardyPhase src(P("t^(3/2)"));
    auto scheme = AveragingScheme::full(100000, CheckpointRule::explicit_points({100000}));
    // mpmath at 40 digits, mean over m = 2 .. 100001
    auto c = empirical_correlation(src, Q({1, 0}, {1, -1}), scheme).final().value;
    CHECK(std::abs(c - std::complex<double>(0.0005479564992195263, 0.0003855796926427508)) <= 1e-11);
    auto w = empirical_correlation(src, Q({0}, {1}), scheme).final().value;
    CHECK(std::abs(w - std::complex<double>(0.015289165704627954, 0.015119634259581587)) <= 1e-11);
}

TEST_CASE("e(n^(3/2)) decorrelates at N = 1e7" * doctest::timeout(600))
{
    HardyPhase src(P("t^(3/2)"));
    auto s = empirical_correlation(src, Q({1, 0}, {1, -1}), AveragingScheme::full(10000000));
    CHECK(std::abs(s.final().value) <= 0.05);
}

TEST_CASE("joint correlations")
{
    auto a = P("t^(3/2)");
    auto s1 = std::make_shared<HardyPhase>(a);
    auto s2 = std::make_shared<HardyPhase>(a.scaled(Coefficient::constant(Constant::sqrt2)));
    auto scheme = AveragingScheme::full(200000);

    auto single = joint_correlation({s1}, {Q({3, 1}, {1, -1})}, scheme);
    auto direct = empirical_correlation(*s1, Q({3, 1}, {1, -1}), scheme);
    CHECK(single.to_csv() == direct.to_csv());

    auto ident = joint_correlation({s1, s2}, {Q({0, 0}, {1, -1}), Q({0, 0}, {1, -1})}, scheme);
    CHECK(same(ident.final().value, 1.0));

    CHECK_THROWS_AS(joint_correlation({s1, s2}, {Q({0}, {1})}, scheme), BadQuery);
}

TEST_CASE("joint correlation of e(a) and e(sqrt2 a) at N = 1e7" * doctest::timeout(600))
{
    auto a = P("t^(3/2)");
    auto s1 = std::make_shared<HardyPhase>(a);
    auto s2 = std::make_shared<HardyPhase>(a.scaled(Coefficient::constant(Constant::sqrt2)));
    auto j = joint_correlation({s1, s2}, {Q({1, 0}, {1, -1}), Q({0}, {1})}, AveragingScheme::full(10000000));
    CHECK(std::abs(j.final().value) <= 0.05);
}

TEST_CASE("correlation tables share one pass and match single calls bitwise")
{
    HardyPhase src(P("t^(3/2)"));
    auto scheme = AveragingScheme::full(1000000);
    CHECK(correlation_table(src, {}, scheme).empty());

    auto one = correlation_table(src, {Q({2, 0}, {1, -1})}, scheme);
    REQUIRE(one.size() == 1);
    CHECK(same(one[0].value, empirical_correlation(src, Q({2, 0}, {1, -1}), scheme).final().value));

    auto qs = exhaustive_queries(4, 5);
    auto table = correlation_series(src, qs, scheme);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 12; ++i) {
        const auto k = static_cast<std::size_t>(rng() % qs.size());
        auto single = empirical_correlation(src, qs[k], scheme);
        CHECK(single.to_csv() == table[k].to_csv());
    }

    // flipping every sign conjugates exactly
    std::vector<CorrelationQuery> flipped;
    for (auto q : qs) {
        for (auto &s : q.signs)
            s = -s;
        flipped.push_back(q);
    }
    auto conj_table = correlation_series(src, flipped, scheme);
    bool all_conj = true;
    for (std::size_t k = 0; k < qs.size(); ++k)
        for (std::size_t c = 0; c < table[k].points.size(); ++c)
            all_conj = all_conj && same(conj_table[k].points[c].value, std::conj(table[k].points[c].value));
    CHECK(all_conj);
}

TEST_CASE("translating shifts changes only boundary terms")
{
    HardyPhase src(P("t^(3/2) + sqrt5*t"));
    auto scheme = AveragingScheme::full(1000000);
    const double n = 1e6;
    for (auto q : {Q({1, 0}, {1, -1}), Q({3, 1, 0}, {1, 1, -1}), Q({4, 2, 1, 0}, {1, -1, -1, 1})}) {
        auto base = empirical_correlation(src, q, scheme).final().value;
        auto moved = q;
        for (auto &s : moved.shifts)
            s += 1;
        auto v = empirical_correlation(src, moved, scheme).final().value;
        CHECK(std::abs(v - base) <= std::min(1e-4, 2.0 * static_cast<double>(q.shifts.size()) / n));
    }
    for (int h : {1, 2, 5}) {
        auto fwd = empirical_correlation(src, Q({h, 0}, {1, -1}), scheme).final().value;
        auto back = empirical_correlation(src, Q({0, h}, {1, -1}), scheme).final().value;
        CHECK(std::abs(std::conj(fwd) - back) <= 2.0 * h / n);
    }
}
