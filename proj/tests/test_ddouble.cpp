#include "doctest.h"

#include <random>

#include "flab/bigfloat.hpp"
#include "flab/ddouble.hpp"

using flab::BigFloat;
using flab::DDouble;

namespace {

// relative error of a double-double against a 256-bit reference
double rel_error(DDouble x, const BigFloat &ref)
{
    BigFloat d(256);
    mpfr_set_d(d.get(), x.hi(), MPFR_RNDN);
    mpfr_add_d(d.get(), d.get(), x.lo(), MPFR_RNDN);
    mpfr_sub(d.get(), d.get(), ref.get(), MPFR_RNDN);
    mpfr_div(d.get(), d.get(), ref.get(), MPFR_RNDN);
    return std::fabs(d.to_double());
}

BigFloat to_big(DDouble x)
{
    BigFloat b(256);
    mpfr_set_d(b.get(), x.hi(), MPFR_RNDN);
    mpfr_add_d(b.get(), b.get(), x.lo(), MPFR_RNDN);
    return b;
}

} // namespace

TEST_CASE("error-free transforms are exact")
{
    DDouble s = DDouble::twosum(1.0, 1e-30);
    CHECK(s.hi() == 1.0);
    CHECK(s.lo() == 1e-30);
    DDouble p = DDouble::twoprod(1.0 + 0x1p-30, 1.0 + 0x1p-30);
    CHECK(p.hi() == 1.0 + 0x1p-29);
    CHECK(p.lo() == 0x1p-60);
}

TEST_CASE("sqrt exp log match a 256-bit reference")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_sqrt = 0, worst_exp = 0, worst_log = 0;
    for (int i = 0; i < 2000; ++i) {
        DDouble x = DDouble(std::ldexp(unit(rng) + 0.5, static_cast<int>(unit(rng) * 80) - 20)) +
                    DDouble(unit(rng) * 1e-20);
        BigFloat ref(256);
        BigFloat bx = to_big(x);

        mpfr_sqrt(ref.get(), bx.get(), MPFR_RNDN);
        worst_sqrt = std::max(worst_sqrt, rel_error(flab::sqrt(x), ref));

        // log is ill-conditioned near 1; measure error relative to max(1, |log x|)
        mpfr_log(ref.get(), bx.get(), MPFR_RNDN);
        worst_log = std::max(worst_log, rel_error(flab::log(x), ref) *
                                            std::min(1.0, std::fabs(ref.to_double())));

        DDouble y = DDouble(unit(rng) * 400.0 - 200.0) + DDouble(unit(rng) * 1e-18);
        BigFloat by = to_big(y);
        mpfr_exp(ref.get(), by.get(), MPFR_RNDN);
        worst_exp = std::max(worst_exp, rel_error(flab::exp(y), ref) / (1.0 + std::fabs(y.hi())));
    }
    CHECK(worst_sqrt < 0x1p-102);
    CHECK(worst_log < 0x1p-100);
    CHECK(worst_exp < 0x1p-100);
}

TEST_CASE("floor and frac")
{
    CHECK(flab::frac(DDouble(31.25)) == 0.25);
    DDouble just_below(5.0, -1e-40);
    CHECK(flab::floor(just_below).hi() == 4.0);
    CHECK(flab::frac(just_below) == 0.0); // rounds to the circle point 0
    CHECK(flab::frac(DDouble(-0.25)) == 0.75);
    DDouble big = DDouble::from_int(1000000000000LL) * flab::sqrt(DDouble(2.0));
    CHECK(flab::frac(big) == doctest::Approx(0.0950488016887).epsilon(1e-10));
}

TEST_CASE("integer powers")
{
    CHECK(flab::pow(DDouble(3.0), 4).hi() == 81.0);
    CHECK(flab::pow(DDouble(2.0), -3).hi() == 0.125);
    DDouble x = DDouble::from_int(123456789);
    DDouble cube = flab::pow(x, 3);
    BigFloat ref(256);
    mpfr_set_si(ref.get(), 123456789, MPFR_RNDN);
    mpfr_pow_ui(ref.get(), ref.get(), 3, MPFR_RNDN);
    CHECK(rel_error(cube, ref) < 0x1p-104);
}
