#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace flab {

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2, roughly 106 significand bits.
// Products use Dekker splitting so results do not depend on FMA availability;
// the build disables floating-point contraction for the same reason.
class DDouble {
public:
    constexpr DDouble() : _hi(0.0), _lo(0.0) { }

    constexpr DDouble(double x) : _hi(x), _lo(0.0) { }

    constexpr DDouble(double hi, double lo) : _hi(hi), _lo(lo) { }

    static DDouble from_int(std::int64_t n);

    constexpr double hi() const { return _hi; }

    constexpr double lo() const { return _lo; }

    explicit operator double() const { return _hi + _lo; }

    friend DDouble operator-(DDouble x) { return DDouble(-x._hi, -x._lo); }

    friend DDouble operator+(DDouble x, double y);
    friend DDouble operator+(DDouble x, DDouble y);
    friend DDouble operator+(double x, DDouble y) { return y + x; }
    friend DDouble operator-(DDouble x, double y) { return x + (-y); }
    friend DDouble operator-(double x, DDouble y) { return (-y) + x; }
    friend DDouble operator-(DDouble x, DDouble y) { return x + (-y); }

    friend DDouble operator*(DDouble x, double y);
    friend DDouble operator*(DDouble x, DDouble y);
    friend DDouble operator*(double x, DDouble y) { return y * x; }

    friend DDouble operator/(DDouble x, double y);
    friend DDouble operator/(DDouble x, DDouble y);

    DDouble &operator+=(DDouble y) { return *this = *this + y; }
    DDouble &operator-=(DDouble y) { return *this = *this - y; }
    DDouble &operator*=(DDouble y) { return *this = *this * y; }
    DDouble &operator/=(DDouble y) { return *this = *this / y; }

    friend bool operator<(DDouble x, DDouble y)
    {
        return x._hi < y._hi || (x._hi == y._hi && x._lo < y._lo);
    }
    friend bool operator==(DDouble x, DDouble y)
    {
        return x._hi == y._hi && x._lo == y._lo;
    }

    static DDouble fast_twosum(double a, double b)
    {
        double s = a + b;
        double z = s - a;
        return DDouble(s, b - z);
    }

    static DDouble twosum(double a, double b)
    {
        double s = a + b;
        double ap = s - b;
        double bp = s - ap;
        return DDouble(s, (a - ap) + (b - bp));
    }

    static DDouble twoprod(double a, double b)
    {
        constexpr double split = 134217729.0; // 2^27 + 1
        double p = a * b;
        double ca = split * a;
        double ahi = ca - (ca - a);
        double alo = a - ahi;
        double cb = split * b;
        double bhi = cb - (cb - b);
        double blo = b - bhi;
        double err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
        return DDouble(p, err);
    }

private:
    double _hi;
    double _lo;
};

inline DDouble operator+(DDouble x, double y)
{
    DDouble s = DDouble::twosum(x.hi(), y);
    double v = x.lo() + s.lo();
    return DDouble::fast_twosum(s.hi(), v);
}

inline DDouble operator+(DDouble x, DDouble y)
{
    DDouble s = DDouble::twosum(x.hi(), y.hi());
    DDouble t = DDouble::twosum(x.lo(), y.lo());
    double c = s.lo() + t.hi();
    DDouble v = DDouble::fast_twosum(s.hi(), c);
    double w = t.lo() + v.lo();
    return DDouble::fast_twosum(v.hi(), w);
}

inline DDouble operator*(DDouble x, double y)
{
    DDouble c = DDouble::twoprod(x.hi(), y);
    double cl = x.lo() * y + c.lo();
    return DDouble::fast_twosum(c.hi(), cl);
}

inline DDouble operator*(DDouble x, DDouble y)
{
    DDouble c = DDouble::twoprod(x.hi(), y.hi());
    double cl = (x.hi() * y.lo() + x.lo() * y.hi()) + c.lo();
    return DDouble::fast_twosum(c.hi(), cl);
}

inline DDouble operator/(DDouble x, double y)
{
    double th = x.hi() / y;
    DDouble p = DDouble::twoprod(th, y);
    double delta = ((x.hi() - p.hi()) - p.lo()) + x.lo();
    return DDouble::fast_twosum(th, delta / y);
}

inline DDouble operator/(DDouble x, DDouble y)
{
    double q1 = x.hi() / y.hi();
    DDouble r = x - y * q1;
    double q2 = r.hi() / y.hi();
    r = r - y * q2;
    double q3 = r.hi() / y.hi();
    DDouble q = DDouble::fast_twosum(q1, q2);
    return q + q3;
}

inline DDouble DDouble::from_int(std::int64_t n)
{
    double hi = static_cast<double>(n);
    // hi is n rounded; the remainder is exactly representable for |n| < 2^63
    double lo = static_cast<double>(n - static_cast<std::int64_t>(hi));
    return fast_twosum(hi, lo);
}

DDouble sqrt(DDouble x);
DDouble exp(DDouble x);
DDouble log(DDouble x);
DDouble floor(DDouble x);
DDouble ldexp(DDouble x, int e);

/// Integer power by repeated squaring; negative exponents invert.
DDouble pow(DDouble x, int n);

/// x - floor(x) rounded to double, in [0, 1).
double frac(DDouble x);

/// Shortest decimal form with about 32 significant digits.
std::string to_string(DDouble x);

namespace dd_const {
DDouble ln2();
DDouble pi();
DDouble two_pi();
}

} // namespace flab
