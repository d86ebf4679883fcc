#include <cmath>

#include "flab/errors.hpp"
#include "flab/hardy.hpp"

namespace flab {

namespace {

// x <- base^(num/den) for positive base; returns true iff exact.
bool rational_power(BigFloat &x, mpfr_srcptr base, const Rational &p)
{
    std::int64_t num = p.numerator();
    std::int64_t den = p.denominator();
    unsigned long mag = static_cast<unsigned long>(num < 0 ? -num : num);
    int t1 = mpfr_pow_ui(x.get(), base, mag, MPFR_RNDN);
    int t2 = den == 1 ? 0 : mpfr_rootn_ui(x.get(), x.get(), static_cast<unsigned long>(den), MPFR_RNDN);
    int t3 = num < 0 ? mpfr_ui_div(x.get(), 1, x.get(), MPFR_RNDN) : 0;
    return t1 == 0 && t2 == 0 && t3 == 0;
}

std::int64_t op_weight(const Rational &r)
{
    std::int64_t n = r.numerator() < 0 ? -r.numerator() : r.numerator();
    return n + r.denominator();
}

} // namespace

BigValue eval_mpfr(const HardyExpr &e, std::int64_t n, int precision_bits)
{
    if (precision_bits < 64)
        throw std::invalid_argument("precision_bits must be at least 64");
    if (static_cast<double>(n) < e.t0())
        throw std::invalid_argument("evaluation point below the domain start");
    const mpfr_prec_t prec = precision_bits;
    BigFloat nn(prec), logn(prec), tp(prec), lp(prec), c(prec), acc(prec), abs_sum(64);
    mpfr_set_sj(nn.get(), n, MPFR_RNDN);
    bool exact = true;
    bool need_log = false;
    for (const auto &t : e.terms())
        need_log = need_log || t.b != 0;
    if (need_log) {
        int tl = mpfr_log(logn.get(), nn.get(), MPFR_RNDN);
        exact = exact && tl == 0;
    }
    double ops = 0.0;
    for (const auto &t : e.terms()) {
        bool ex = t.coef.mpfr_value(c);
        if (t.a != 0)
            ex = rational_power(tp, nn.get(), t.a) && ex;
        else
            mpfr_set_ui(tp.get(), 1, MPFR_RNDN);
        if (t.b != 0)
            ex = rational_power(lp, logn.get(), t.b) && ex;
        else
            mpfr_set_ui(lp.get(), 1, MPFR_RNDN);
        int m1 = mpfr_mul(c.get(), c.get(), tp.get(), MPFR_RNDN);
        int m2 = mpfr_mul(c.get(), c.get(), lp.get(), MPFR_RNDN);
        int s = mpfr_add(acc.get(), acc.get(), c.get(), MPFR_RNDN);
        exact = exact && ex && m1 == 0 && m2 == 0 && s == 0;
        mpfr_abs(c.get(), c.get(), MPFR_RNDN);
        mpfr_add(abs_sum.get(), abs_sum.get(), c.get(), MPFR_RNDU);
        ops = std::max(ops, 12.0 + static_cast<double>(op_weight(t.a) + op_weight(t.b)));
    }
    double err = 0.0;
    if (!exact) {
        double terms = static_cast<double>(e.terms().size());
        err = std::ldexp(mpfr_get_d(abs_sum.get(), MPFR_RNDU), 1 - precision_bits) * terms * ops;
    }
    return BigValue{std::move(acc), err};
}

FracResult eval_frac(const HardyExpr &e, std::int64_t n, int precision_bits)
{
    BigValue v = eval_mpfr(e, n, precision_bits);
    BigFloat fl(precision_bits);
    mpfr_floor(fl.get(), v.value.get());
    mpfr_sub(v.value.get(), v.value.get(), fl.get(), MPFR_RNDN);
    double f = mpfr_get_d(v.value.get(), MPFR_RNDN);
    if (f >= 1.0)
        f = 0.0;
    // rounding the fractional part to double
    double err = v.err_bound + 0x1p-53;
    if (err > 1e-10)
        throw PrecisionInsufficient("error bound " + std::to_string(err) + " at n=" +
                                    std::to_string(n) + " with " + std::to_string(precision_bits) +
                                    " bits");
    return FracResult{f, err};
}

// ---------------------------------------------------------------------------

FastEvaluator::FastEvaluator(const HardyExpr &e) : _expr(e)
{
    auto kind = [](const Rational &r) {
        if (r == 0)
            return PowerKind::zero;
        if (r.denominator() == 1)
            return PowerKind::integer;
        if (r.denominator() == 2)
            return PowerKind::half;
        return PowerKind::general;
    };
    for (const auto &t : e.terms()) {
        Prepared p;
        p.coef = t.coef.dd_value();
        p.coef_abs = std::fabs(p.coef.hi());
        p.a = t.a;
        p.b = t.b;
        p.t_kind = kind(t.a);
        p.log_kind = kind(t.b);
        _needs_log = _needs_log || t.b != 0 || p.t_kind == PowerKind::general;
        _terms.push_back(p);
    }
}

namespace {

// base^(p/2) with p odd: base^((p-1)/2) * sqrt(base)
DDouble half_power(DDouble base, const Rational &r)
{
    auto p = r.numerator();
    return pow(base, static_cast<int>((p - 1) / 2)) * sqrt(base);
}

DDouble general_power(DDouble log_base, const Rational &r, double &arg_mag)
{
    DDouble arg = log_base * static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
    arg_mag = std::fabs(arg.hi());
    return exp(arg);
}

} // namespace

DDouble FastEvaluator::value(std::int64_t n, double &err_bound) const
{
    const DDouble x = DDouble::from_int(n);
    DDouble logx;
    DDouble loglogx;
    bool have_loglog = false;
    if (_needs_log)
        logx = log(x);
    DDouble sum;
    double weighted = 0.0;
    for (const auto &t : _terms) {
        DDouble v = t.coef;
        double rel = 4.0;
        double arg = 0.0;
        switch (t.t_kind) {
        case PowerKind::zero: break;
        case PowerKind::integer:
            v *= pow(x, static_cast<int>(t.a.numerator()));
            rel += 2.0 * static_cast<double>(op_weight(t.a));
            break;
        case PowerKind::half:
            v *= half_power(x, t.a);
            rel += 2.0 * static_cast<double>(op_weight(t.a));
            break;
        case PowerKind::general:
            v *= general_power(logx, t.a, arg);
            rel += 16.0 + 8.0 * arg;
            break;
        }
        switch (t.log_kind) {
        case PowerKind::zero: break;
        case PowerKind::integer:
            v *= pow(logx, static_cast<int>(t.b.numerator()));
            rel += 8.0 * static_cast<double>(op_weight(t.b));
            break;
        case PowerKind::half:
            v *= half_power(logx, t.b);
            rel += 8.0 * static_cast<double>(op_weight(t.b));
            break;
        case PowerKind::general:
            if (!have_loglog) {
                loglogx = log(logx);
                have_loglog = true;
            }
            v *= general_power(loglogx, t.b, arg);
            rel += 16.0 + 8.0 * arg + 8.0 * static_cast<double>(op_weight(t.b));
            break;
        }
        sum += v;
        weighted += std::fabs(v.hi()) * rel;
    }
    err_bound = std::ldexp(weighted + std::fabs(sum.hi()) * static_cast<double>(_terms.size()), -100);
    return sum;
}

double FastEvaluator::frac(std::int64_t n) const
{
    double err = 0.0;
    DDouble v = value(n, err);
    if (err <= 1e-13)
        return ::flab::frac(v);
    int bits = std::max(128, std::ilogb(std::fabs(v.hi()) + 1.0) + 96);
    BigValue big = eval_mpfr(_expr, n, bits);
    BigFloat fl(bits);
    mpfr_floor(fl.get(), big.value.get());
    mpfr_sub(big.value.get(), big.value.get(), fl.get(), MPFR_RNDN);
    double f = mpfr_get_d(big.value.get(), MPFR_RNDN);
    return f >= 1.0 ? 0.0 : f;
}

} // namespace flab
