#include "flab/ddouble.hpp"

#include <cstdio>
#include <limits>
#include <stdexcept>

namespace flab {

namespace dd_const {
DDouble ln2() { return DDouble(6.931471805599452862e-01, 2.319046813846299558e-17); }
DDouble pi() { return DDouble(3.141592653589793116e+00, 1.224646799147353207e-16); }
DDouble two_pi() { return DDouble(6.283185307179586232e+00, 2.449293598294706414e-16); }
}

DDouble ldexp(DDouble x, int e)
{
    return DDouble(std::ldexp(x.hi(), e), std::ldexp(x.lo(), e));
}

DDouble sqrt(DDouble x)
{
    if (x.hi() <= 0.0) {
        if (x.hi() == 0.0)
            return DDouble();
        throw std::domain_error("sqrt of negative double-double");
    }
    double s = std::sqrt(x.hi());
    // one Newton step: s + (x - s^2) / (2s)
    DDouble s2 = DDouble::twoprod(s, s);
    DDouble r = x - s2;
    return DDouble::twosum(s, 0.0) + r.hi() / (2.0 * s);
}

DDouble exp(DDouble x)
{
    if (x.hi() > 709.0)
        return DDouble(std::numeric_limits<double>::infinity());
    if (x.hi() < -745.0)
        return DDouble();
    if (x.hi() == 0.0 && x.lo() == 0.0)
        return DDouble(1.0);

    const DDouble ln2 = dd_const::ln2();
    double k = std::nearbyint(x.hi() / ln2.hi());
    DDouble r = x - ln2 * k;
    constexpr int halvings = 10;
    r = ldexp(r, -halvings);

    // expm1(r) by Taylor; |r| < 3.4e-4 so 12 terms leave < 1e-50
    DDouble term = r;
    DDouble sum = r;
    for (int i = 2; i <= 12; ++i) {
        term = term * r / static_cast<double>(i);
        sum += term;
    }
    // expm1(2r) = expm1(r) * (expm1(r) + 2)
    for (int i = 0; i < halvings; ++i)
        sum = sum * (sum + 2.0);
    return ldexp(sum + 1.0, static_cast<int>(k));
}

DDouble log(DDouble x)
{
    if (x.hi() <= 0.0)
        throw std::domain_error("log of non-positive double-double");
    DDouble y(std::log(x.hi()));
    // Newton step on exp(y) = x
    y = y + x * exp(-y) - 1.0;
    return y;
}

DDouble floor(DDouble x)
{
    double fh = std::floor(x.hi());
    if (fh == x.hi())
        return DDouble::fast_twosum(fh, std::floor(x.lo()));
    return DDouble(fh);
}

DDouble pow(DDouble x, int n)
{
    if (n == 0)
        return DDouble(1.0);
    unsigned m = n < 0 ? static_cast<unsigned>(-static_cast<long>(n)) : static_cast<unsigned>(n);
    DDouble result(1.0);
    DDouble base = x;
    while (m) {
        if (m & 1u)
            result *= base;
        m >>= 1;
        if (m)
            base *= base;
    }
    return n < 0 ? DDouble(1.0) / result : result;
}

double frac(DDouble x)
{
    DDouble f = x - floor(x);
    double r = static_cast<double>(f);
    if (r >= 1.0)
        r = 0.0;
    if (r < 0.0)
        r = 0.0;
    return r;
}

std::string to_string(DDouble x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g%+.17g", x.hi(), x.lo());
    return buf;
}

} // namespace flab
