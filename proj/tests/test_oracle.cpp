#include "doctest.h"

#include <cmath>
#include <random>

#include "flab/errors.hpp"
#include "flab/oracle.hpp"

using namespace flab;

namespace {

CorrelationQuery Q(std::vector<int> shifts, std::vector<int> signs, int r = 1) { return {shifts, signs, r}; }

const std::complex<double> e_2sqrt2(0.4730700426878691, -0.8810248207123893);

Classification cls_of(const char *s) { return classify(HardyExpr::parse(s)); }

} // namespace

TEST_CASE("power sum condition")
{
    auto a = power_sum_condition(Q({1, 0}, {1, -1}), 1);
    CHECK(a.vanishes);
    CHECK(a.l_d == 1);
    auto b = power_sum_condition(Q({2, 1, 1, 0}, {1, -1, -1, 1}), 2);
    CHECK(b.vanishes);
    CHECK(b.l_d == 2);
    CHECK_FALSE(power_sum_condition(Q({0, 1}, {1, 1}), 1).vanishes);
    // 0^0 = 1
    CHECK(power_sum_condition(Q({0}, {1}), 0).l_d == 1);
    // dilation scales the shifts
    CHECK(power_sum_condition(Q({1, 0}, {1, -1}, 3), 1).l_d == 3);
}

TEST_CASE("binomial condition")
{
    auto a = binom_condition(Q({1, 0}, {1, -1}), 1);
    CHECK(a.vanishes);
    CHECK(a.c_d == 1);
    auto b = binom_condition(Q({2, 1, 1, 0}, {1, -1, -1, 1}), 2);
    CHECK(b.vanishes);
    CHECK(b.c_d == 1);
    CHECK_FALSE(binom_condition(Q({0}, {1}), 1).vanishes);
    // C(-2, 2) = (-2)(-3)/2 = 3
    CHECK(binom_condition(Q({-2}, {1}), 2).c_d == 3);
}

TEST_CASE("binomial and power-sum conditions are equivalent, c_d = l_d / d!")
{
    auto qs = exhaustive_queries(4, 5);
    int mismatches = 0, scaling = 0, both = 0;
    for (int d = 0; d <= 4; ++d) {
        const mpz_class f = factorial(d);
        for (const auto &q : qs) {
            auto ps = power_sum_condition(q, d);
            auto bc = binom_condition(q, d);
            if (ps.vanishes != bc.vanishes)
                ++mismatches;
            if (ps.vanishes && bc.vanishes) {
                ++both;
                mpq_class scaled(ps.l_d, f);
                scaled.canonicalize();
                if (bc.c_d != scaled)
                    ++scaling;
            }
        }
    }
    CHECK(mismatches == 0);
    CHECK(scaling == 0);
    CHECK(both > 1000);
}

TEST_CASE("measure specs")
{
    auto u = MeasureSpec::uniform();
    CHECK(u.fourier(mpz_class(0)) == std::complex<double>(1.0));
    CHECK(u.fourier(mpz_class(3)) == std::complex<double>(0.0));

    auto p = MeasureSpec::point_mass(Coefficient::constant(Constant::sqrt2));
    CHECK(std::abs(p.fourier(mpz_class(2)) - e_2sqrt2) <= 1e-15);
    CHECK(std::abs(p.pushforward(2).fourier(mpz_class(1)) - e_2sqrt2) <= 1e-15);
    CHECK(std::abs(p.fourier(mpq_class(2, 1)) - e_2sqrt2) <= 1e-15);

    std::map<std::int64_t, std::complex<double>> t{{1, {0.1, 0.2}}, {2, {0.0, -0.5}}};
    auto tab = MeasureSpec::fourier_table(t);
    CHECK(tab.fourier(mpz_class(-1)) == std::complex<double>(0.1, -0.2));
    CHECK_THROWS_AS(tab.fourier(mpz_class(3)), FourierOutOfRange);
    CHECK_THROWS_AS(tab.fourier(mpq_class(1, 2)), NonIntegerFrequency);
    CHECK(tab.pushforward(2).fourier(mpz_class(1)) == std::complex<double>(0.0, -0.5));
    CHECK_THROWS_AS(MeasureSpec::fourier_table({{1, {2.0, 0.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureSpec::fourier_table({{1, {0.5, 0.1}}, {-1, {0.5, 0.1}}}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureSpec::fourier_table({{2, {0.5, 0.1}}}), std::invalid_argument);
}

TEST_CASE("predictions")
{
    auto case1 = cls_of("t^(3/2)");
    CHECK(predict_correlation(case1, MeasureSpec::uniform(), Q({1, 0}, {1, -1})) == std::complex<double>(0.0));
    for (const char *s : {"t^(3/2)", "t*log(t)", "t*log(t)^(1/2)", "sqrt2*t^2 + t^(3/2)"})
        CHECK(predict_correlation(cls_of(s), MeasureSpec::uniform(), Q({0, 0}, {1, -1})) ==
              std::complex<double>(1.0));
    auto case4 = cls_of("sqrt2*t^2");
    auto v = predict_correlation(case4, MeasureSpec::point_mass(Coefficient::constant(Constant::sqrt2)),
                                 Q({2, 1, 1, 0}, {1, -1, -1, 1}));
    CHECK(std::abs(v - e_2sqrt2) <= 1e-12);
    CHECK_THROWS_AS(predict_correlation(cls_of("1/2*t^2 + t^(2/3)"), MeasureSpec::uniform(), Q({0}, {1})),
                    HypothesisUnmet);
    std::map<std::int64_t, std::complex<double>> t{{1, {0.1, 0.2}}};
    CHECK_THROWS_AS(predict_correlation(case1, MeasureSpec::fourier_table(t), Q({3, 0}, {1, -1})),
                    FourierOutOfRange);
}

TEST_CASE("unipotent orbit phases")
{
    const double alpha = 0.1234567;
    UnipotentModel m1{1, MeasureSpec::uniform()};
    for (std::int64_t n : {0, 1, 7, 1000003}) {
        auto z = unipotent_orbit_phase(m1, {alpha, 0.0}, n);
        double x = std::fmod(static_cast<double>(n) * alpha, 1.0);
        CHECK(std::abs(z - unit(x)) <= 1e-9);
    }
    UnipotentModel m2{2, MeasureSpec::uniform()};
    const std::vector<double> y{0.11, 0.29, 0.37};
    CHECK(std::abs(unipotent_orbit_phase(m2, y, 3) - unit(0.37 + 3 * 0.29 + 3 * 0.11)) <= 1e-14);
    UnipotentModel m4{4, MeasureSpec::uniform()};
    CHECK(std::abs(unipotent_orbit_phase(m4, {0.1, 0.2, 0.3, 0.4, 0.45}, 0) - unit(0.45)) <= 1e-15);
    // negative n uses the binomial polynomial
    CHECK(std::abs(unipotent_orbit_phase(m2, y, -2) - unit(0.37 - 2 * 0.29 + 3 * 0.11)) <= 1e-14);
}

TEST_CASE("expected correlations in the torus model")
{
    UnipotentModel u1{1, MeasureSpec::uniform()};
    CHECK(unipotent_expected_correlation(u1, Q({1, 0}, {1, -1})) == std::complex<double>(0.0));
    BigFloat beta(192, 0.3183);
    UnipotentModel p1{1, MeasureSpec::point_mass(beta)};
    CHECK(std::abs(unipotent_expected_correlation(p1, Q({1, 0}, {1, -1})) - unit(0.3183)) <= 1e-15);
    UnipotentModel u2{2, MeasureSpec::uniform()};
    CHECK(unipotent_expected_correlation(u2, Q({2, 1, 1, 0}, {1, -1, -1, 1})) == std::complex<double>(0.0));
}

TEST_CASE("orbit averages match the torus-model integral")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::vector<CorrelationQuery> qs{Q({1, 0}, {1, -1}), Q({0, 0}, {1, -1}), Q({2, 1, 1, 0}, {1, -1, -1, 1}),
                                           Q({3, 2, 1, 0}, {1, -1, -1, 1}), Q({2, 0}, {1, 1})};
    for (int d = 0; d <= 2; ++d) {
        UnipotentModel m{d, MeasureSpec::uniform()};
        for (const auto &q : qs) {
            std::complex<double> sum = 0;
            const int points = 10000;
            for (int p = 0; p < points; ++p) {
                std::vector<double> y(static_cast<std::size_t>(d) + 1);
                for (auto &c : y)
                    c = unif(rng);
                std::complex<double> prod = 1;
                for (std::size_t j = 0; j < q.shifts.size(); ++j) {
                    auto z = unipotent_orbit_phase(m, y, q.shifts[j]);
                    prod *= q.signs[j] > 0 ? z : std::conj(z);
                }
                sum += prod;
            }
            CHECK(std::abs(sum / static_cast<double>(points) - unipotent_expected_correlation(m, q)) <= 0.05);
        }
    }
}

TEST_CASE("predictions agree with the torus model")
{
    auto case4 = cls_of("sqrt2*t^2");
    auto r = model_reconciliation(case4, MeasureSpec::point_mass(Coefficient::constant(Constant::sqrt2)),
                                  Q({2, 1, 1, 0}, {1, -1, -1, 1}));
    CHECK(r.match);
    CHECK(std::abs(r.prediction - e_2sqrt2) <= 1e-12);

    auto case1 = cls_of("t^(3/2)");
    for (const auto &q : exhaustive_queries(2, 3))
        CHECK(model_reconciliation(case1, MeasureSpec::uniform(), q).match);

    auto case2 = cls_of("t^(5/2)");
    int bad = 0;
    for (const auto &q : exhaustive_queries(4, 5))
        bad += !model_reconciliation(case2, MeasureSpec::uniform(), q).match;
    CHECK(bad == 0);
}

TEST_CASE("uniform predictions are invariant under dilation")
{
    auto qs = exhaustive_queries(4, 5);
    for (const char *s : {"t^(3/2)", "t^(5/2)"}) {
        auto c = cls_of(s);
        int bad = 0;
        for (const auto &q : qs) {
            auto base = predict_correlation(c, MeasureSpec::uniform(), q);
            for (int r : {2, 3}) {
                auto dq = q;
                dq.dilation = r;
                bad += predict_correlation(c, MeasureSpec::uniform(), dq) != base;
            }
        }
        CHECK(bad == 0);
    }
}
