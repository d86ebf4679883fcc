#include "flab/systems.hpp"

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>

#include "flab/errors.hpp"

namespace flab {

namespace {

constexpr int max_floor_bits = 512;

std::int64_t to_int64(const BigFloat &integral)
{
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), integral.get(), MPFR_RNDN);
    if (!z.fits_slong_p())
        throw std::overflow_error("integer part beyond 64 bits");
    return z.get_si();
}

std::int64_t to_int64(DDouble integral)
{
    if (!(std::fabs(integral.hi()) < 0x1p62))
        throw std::overflow_error("integer part beyond 64 bits");
    return static_cast<std::int64_t>(integral.hi()) + static_cast<std::int64_t>(integral.lo());
}

// floor(x) when the fractional part stays clear of 0 and 1 by more than err.
bool decided(const BigFloat &x, double err, std::int64_t &out)
{
    BigFloat fl(x.precision()), f(x.precision());
    mpfr_floor(fl.get(), x.get());
    mpfr_sub(f.get(), x.get(), fl.get(), MPFR_RNDN);
    const double fd = f.to_double();
    if (err == 0.0 || (fd > err && 1.0 - fd > err)) {
        out = to_int64(fl);
        return true;
    }
    return false;
}

// a(n) as an exact rational, when every coefficient and every n^a_j is rational.
bool exact_rational_value(const HardyExpr &a, std::int64_t n, mpq_class &out)
{
    out = 0;
    const mpz_class nn(static_cast<long>(n));
    for (const Term &t : a.terms()) {
        if (t.b != 0 || t.coef.rationality() != Rationality::rational)
            return false;
        const auto den = static_cast<unsigned long>(t.a.denominator());
        mpz_class root;
        if (mpz_root(root.get_mpz_t(), nn.get_mpz_t(), den) == 0)
            return false;
        const std::int64_t p = t.a.numerator();
        mpz_class power;
        mpz_pow_ui(power.get_mpz_t(), root.get_mpz_t(), static_cast<unsigned long>(p < 0 ? -p : p));
        mpq_class v = p < 0 ? mpq_class(mpz_class(1), power) : mpq_class(power);
        v.canonicalize();
        const Rational c = t.coef.rational_part();
        out += v * mpq_class(mpz_class(static_cast<long>(c.numerator())), mpz_class(static_cast<long>(c.denominator())));
    }
    return true;
}

std::int64_t floor_with(const FastEvaluator &fast, const HardyExpr &a, std::int64_t n, int precision_bits)
{
    double err;
    const DDouble v = fast.value(n, err);
    const DDouble fl = floor(v);
    const double f = static_cast<double>(v - fl);
    if (f > err && 1.0 - f > err)
        return to_int64(fl);
    std::int64_t out;
    for (int bits = std::max(precision_bits, 128); bits <= max_floor_bits; bits *= 2) {
        BigValue big = eval_mpfr(a, n, bits);
        if (decided(big.value, big.err_bound, out))
            return out;
    }
    mpq_class exact;
    if (exact_rational_value(a, n, exact)) {
        mpz_class fl_z;
        mpz_fdiv_q(fl_z.get_mpz_t(), exact.get_num_mpz_t(), exact.get_den_mpz_t());
        if (fl_z.fits_slong_p())
            return fl_z.get_si();
    }
    throw FloorUndecidable("[" + a.str() + "] at n=" + std::to_string(n) + " up to 512 bits");
}

} // namespace

RotationNumber::RotationNumber(const Coefficient &alpha)
{
    _rational = alpha.rationality() == Rationality::rational;
    alpha.mpfr_value(_big);
    _dd = _big.to_ddouble();
}

RotationNumber::RotationNumber(double alpha) : _big(rotation_bits, alpha), _dd(alpha) { }

double RotationNumber::orbit(double y, std::int64_t t) const
{
    return frac(DDouble(y) + DDouble::from_int(t) * _dd);
}

TorusSystem TorusSystem::rotation(RotationNumber alpha, double y)
{
    if (!(y >= 0.0 && y < 1.0))
        throw std::invalid_argument("initial point must lie in [0, 1)");
    TorusSystem s;
    s._kind = Kind::rotation;
    s._alpha = std::move(alpha);
    s._y = {y};
    return s;
}

TorusSystem TorusSystem::product(std::vector<TorusSystem> factors)
{
    if (factors.empty())
        throw std::invalid_argument("empty product");
    TorusSystem s;
    s._kind = Kind::product;
    s._factors = std::move(factors);
    s._y.clear();
    for (const auto &f : s._factors) {
        auto p = f.point_at(0);
        s._y.insert(s._y.end(), p.begin(), p.end());
    }
    return s;
}

TorusSystem TorusSystem::unipotent(UnipotentModel model, std::vector<double> y)
{
    if (model.d < 0 || model.d > default_max_degree)
        throw std::invalid_argument("unipotent dimension out of range");
    if (y.size() != static_cast<std::size_t>(model.d) + 1)
        throw std::invalid_argument("point must have d + 1 coordinates");
    for (double c : y)
        if (!(c >= 0.0 && c < 1.0))
            throw std::invalid_argument("coordinates must lie in [0, 1)");
    TorusSystem s;
    s._kind = Kind::unipotent;
    s._model = std::move(model);
    s._y = std::move(y);
    return s;
}

int TorusSystem::dimension() const
{
    switch (_kind) {
    case Kind::rotation: return 1;
    case Kind::unipotent: return _model.d + 1;
    case Kind::product: break;
    }
    int d = 0;
    for (const auto &f : _factors)
        d += f.dimension();
    return d;
}

std::vector<double> TorusSystem::point_at(std::int64_t t) const
{
    switch (_kind) {
    case Kind::rotation: return {_alpha.orbit(_y[0], t)};
    case Kind::unipotent: return unipotent_orbit_point(_y, t);
    case Kind::product: break;
    }
    std::vector<double> out;
    for (const auto &f : _factors) {
        auto p = f.point_at(t);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::string TorusSystem::describe() const
{
    switch (_kind) {
    case Kind::rotation: {
        char buf[80];
        mpfr_snprintf(buf, sizeof buf, "%.20Rf", _alpha.big().get());
        return std::string("rotation(") + buf + ")";
    }
    case Kind::unipotent: return "unipotent(d=" + std::to_string(_model.d) + ", " + _model.lambda.describe() + ")";
    case Kind::product: break;
    }
    std::string out = "product(";
    for (std::size_t i = 0; i < _factors.size(); ++i)
        out += (i ? ", " : "") + _factors[i].describe();
    return out + ")";
}

std::shared_ptr<const ComplexSource> orbit_sample(const TorusSystem &sys, TimeFn time,
                                                  std::vector<std::int64_t> frequencies, std::int64_t start)
{
    if (frequencies.size() != static_cast<std::size_t>(sys.dimension()))
        throw std::invalid_argument("frequency vector must match the system dimension");
    return make_source(
        [sys, time = std::move(time), m = std::move(frequencies)](std::int64_t n) {
            const auto x = sys.point_at(time(n));
            double phase = 0.0;
            for (std::size_t i = 0; i < m.size(); ++i)
                if (m[i] != 0) {
                    const double p = static_cast<double>(m[i]) * x[i];
                    phase += p - std::floor(p);
                }
            return unit(phase - std::floor(phase));
        },
        start);
}

std::int64_t floor_time(const HardyExpr &a, std::int64_t n, int precision_bits)
{
    return floor_with(FastEvaluator(a), a, n, precision_bits);
}

TimeFn floor_times(const HardyExpr &a, int precision_bits)
{
    auto fast = std::make_shared<const FastEvaluator>(a);
    return [fast, precision_bits](std::int64_t n) { return floor_with(*fast, fast->expr(), n, precision_bits); };
}

BeattySequence::BeattySequence(const Coefficient &alpha, double beta) : _alpha(alpha), _beta(beta)
{
    if (alpha.value() < 1.0 || (alpha - Coefficient(1)).sign() < 0)
        throw NotIncreasing("beatty needs alpha >= 1, got " + alpha.str());
    _dd = RotationNumber(alpha).dd();
}

std::int64_t BeattySequence::operator()(std::int64_t n) const
{
    const DDouble x = DDouble::from_int(n) * _dd + _beta;
    const DDouble fl = floor(x);
    const double f = static_cast<double>(x - fl);
    const double err = std::fabs(static_cast<double>(x)) * 0x1p-100 + 0x1p-1000;
    if (f > err && 1.0 - f > err)
        return to_int64(fl);
    if (_alpha.rationality() == Rationality::rational) {
        const Rational q = _alpha.rational_part();
        mpq_class v(q.numerator(), q.denominator());
        v *= n;
        v += mpq_class(_beta);
        mpz_class fl_z;
        mpz_fdiv_q(fl_z.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
        return fl_z.get_si();
    }
    // an irrational alpha keeps n alpha + beta off the integers
    for (int bits = 256;; bits *= 2) {
        BigFloat y(bits);
        _alpha.mpfr_value(y);
        mpfr_mul_si(y.get(), y.get(), n, MPFR_RNDN);
        mpfr_add_d(y.get(), y.get(), _beta, MPFR_RNDN);
        std::int64_t out;
        if (decided(y, std::fabs(y.to_double()) * std::ldexp(1.0, 4 - bits) + std::ldexp(1.0, -bits), out))
            return out;
        if (bits >= 8192)
            throw FloorUndecidable("beatty floor at n=" + std::to_string(n));
    }
}

std::int64_t beatty(const Coefficient &alpha, double beta, std::int64_t n) { return BeattySequence(alpha, beta)(n); }

int bernoulli_weight(std::uint64_t seed, std::int64_t n)
{
    std::uint64_t z = seed + static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    return (z >> 63) == 0 ? 1 : -1;
}

std::string WeightSpec::describe() const
{
    switch (kind) {
    case Kind::exp_linear: return "exp_linear(" + alpha.str() + ")";
    case Kind::exp_quadratic: return "exp_quadratic(" + alpha.str() + ")";
    case Kind::riemann_sample:
        return "riemann_sample(" + alpha.str() + ", [" + format_double(u) + ", " + format_double(v) + "))";
    case Kind::bernoulli: return "bernoulli(" + std::to_string(seed) + ")";
    case Kind::floor_power: return "floor_power(" + a.str() + ", " + alpha.str() + ")";
    }
    return {};
}

std::shared_ptr<const ComplexSource> make_weight(const WeightSpec &w)
{
    const RotationNumber r(w.alpha);
    switch (w.kind) {
    case WeightSpec::Kind::exp_linear:
        return make_source([r](std::int64_t n) { return unit(r.orbit(0.0, n)); });
    case WeightSpec::Kind::exp_quadratic: {
        const DDouble beta = r.dd();
        return make_source([beta](std::int64_t n) {
            const DDouble nn = DDouble::from_int(n);
            return unit(frac(nn * nn * beta));
        });
    }
    case WeightSpec::Kind::riemann_sample: {
        if (!(0.0 <= w.u && w.u <= w.v && w.v <= 1.0))
            throw std::invalid_argument("riemann_sample needs 0 <= u <= v <= 1");
        const double u = w.u, v = w.v;
        return make_source([r, u, v](std::int64_t n) {
            const double x = r.orbit(0.0, n);
            return std::complex<double>(x >= u && x < v ? 1.0 : -1.0, 0.0);
        });
    }
    case WeightSpec::Kind::bernoulli: {
        const std::uint64_t seed = w.seed;
        return make_source([seed](std::int64_t n) {
            return std::complex<double>(static_cast<double>(bernoulli_weight(seed, n)), 0.0);
        });
    }
    case WeightSpec::Kind::floor_power: {
        auto time = floor_times(w.a);
        return make_source([r, time](std::int64_t n) { return unit(r.orbit(0.0, time(n))); }, w.a.n_start());
    }
    }
    throw std::invalid_argument("unknown weight kind");
}

} // namespace flab
