#include "flab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "flab/errors.hpp"
#include "flab/sequence.hpp"

namespace flab {

namespace {

void reduce_mod1(BigFloat &x)
{
    BigFloat fl(x.precision());
    mpfr_floor(fl.get(), x.get());
    mpfr_sub(x.get(), x.get(), fl.get(), MPFR_RNDN);
}

// e(q alpha) with q exact and alpha a high-precision point
std::complex<double> phase(const mpq_class &q, const BigFloat &alpha)
{
    const long size_bits = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2));
    BigFloat x(alpha.precision() + size_bits + 64);
    mpfr_mul_z(x.get(), alpha.get(), q.get_num_mpz_t(), MPFR_RNDN);
    mpfr_div_z(x.get(), x.get(), q.get_den_mpz_t(), MPFR_RNDN);
    reduce_mod1(x);
    return unit(x.to_double());
}

mpz_class effective_shift(const CorrelationQuery &q, std::size_t j)
{
    return mpz_class(q.dilation) * q.shifts[j];
}

} // namespace

mpz_class factorial(int d)
{
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(d));
    return f;
}

MeasureSpec MeasureSpec::uniform() { return MeasureSpec{}; }

MeasureSpec MeasureSpec::point_mass(const Coefficient &alpha)
{
    MeasureSpec m;
    m._kind = Kind::point_mass;
    alpha.mpfr_value(m._alpha);
    reduce_mod1(m._alpha);
    return m;
}

MeasureSpec MeasureSpec::point_mass(const BigFloat &alpha)
{
    MeasureSpec m;
    m._kind = Kind::point_mass;
    mpfr_set(m._alpha.get(), alpha.get(), MPFR_RNDN);
    reduce_mod1(m._alpha);
    return m;
}

MeasureSpec MeasureSpec::fourier_table(std::map<std::int64_t, std::complex<double>> table)
{
    MeasureSpec m;
    m._kind = Kind::fourier_table;
    auto zero = table.find(0);
    if (zero != table.end() && std::abs(zero->second - 1.0) > 1e-12)
        throw std::invalid_argument("fourier table needs lambda^(0) = 1");
    for (auto [k, v] : table) {
        if (std::abs(v) > 1.0 + 1e-12)
            throw std::invalid_argument("fourier coefficient above 1 in modulus");
        auto neg = table.find(-k);
        if (neg != table.end() && std::abs(neg->second - std::conj(v)) > 1e-12)
            throw std::invalid_argument("fourier table is not conjugate symmetric");
        m._range = std::max(m._range, k < 0 ? -k : k);
    }
    for (auto [k, v] : table)
        if (k > 0)
            m._table[k] = v;
        else if (k < 0)
            m._table[-k] = std::conj(v);
    for (std::int64_t k = 1; k <= m._range; ++k)
        if (!m._table.count(k))
            throw std::invalid_argument("fourier table has a gap at k = " + std::to_string(k));
    return m;
}

std::complex<double> MeasureSpec::fourier(const mpz_class &k) const
{
    switch (_kind) {
    case Kind::uniform:
        return k == 0 ? 1.0 : 0.0;
    case Kind::point_mass:
        return phase(mpq_class(k), _alpha);
    case Kind::fourier_table:
        break;
    }
    if (k == 0)
        return 1.0;
    if (abs(k) > _range)
        throw FourierOutOfRange("frequency " + k.get_str() + " beyond table range " + std::to_string(_range));
    const auto v = _table.at(std::abs(k.get_si()));
    return k > 0 ? v : std::conj(v);
}

std::complex<double> MeasureSpec::fourier(const mpq_class &q) const
{
    if (_kind == Kind::point_mass)
        return phase(q, _alpha);
    if (q.get_den() != 1) {
        if (_kind == Kind::fourier_table)
            throw NonIntegerFrequency("frequency " + q.get_str() + " is not an integer");
        // uniform: integral of e(q t) over [0, 1) for non-integer q
        const double x = q.get_d();
        const auto z = unit(x) - 1.0;
        return z / std::complex<double>(0.0, 2.0 * std::numbers::pi * x);
    }
    return fourier(mpz_class(q.get_num()));
}

MeasureSpec MeasureSpec::pushforward(std::int64_t m) const
{
    if (m < 1)
        throw std::invalid_argument("pushforward factor must be positive");
    MeasureSpec out = *this;
    if (_kind == Kind::point_mass) {
        mpfr_mul_si(out._alpha.get(), _alpha.get(), m, MPFR_RNDN);
        reduce_mod1(out._alpha);
    } else if (_kind == Kind::fourier_table) {
        out._table.clear();
        out._range = _range / m;
        for (std::int64_t k = 1; k <= out._range; ++k)
            out._table[k] = _table.at(k * m);
    }
    return out;
}

std::string MeasureSpec::describe() const
{
    switch (_kind) {
    case Kind::uniform: return "uniform";
    case Kind::point_mass: {
        char buf[64];
        mpfr_snprintf(buf, sizeof buf, "%.25Rf", _alpha.get());
        return std::string("point_mass(") + buf + ")";
    }
    case Kind::fourier_table: return "fourier_table(K=" + std::to_string(_range) + ")";
    }
    return {};
}

PowerSumResult power_sum_condition(const CorrelationQuery &q, int d)
{
    q.validate();
    if (d < 0)
        throw std::invalid_argument("d must be non-negative");
    PowerSumResult r{true, 0};
    for (int i = 0; i <= d; ++i) {
        mpz_class s = 0;
        for (std::size_t j = 0; j < q.shifts.size(); ++j) {
            mpz_class p;
            mpz_pow_ui(p.get_mpz_t(), effective_shift(q, j).get_mpz_t(), static_cast<unsigned long>(i));
            s += q.signs[j] * p;
        }
        if (i < d && s != 0)
            r.vanishes = false;
        if (i == d)
            r.l_d = s;
    }
    return r;
}

BinomResult binom_condition(const CorrelationQuery &q, int d)
{
    q.validate();
    if (d < 0)
        throw std::invalid_argument("d must be non-negative");
    BinomResult r{true, 0};
    for (int i = 0; i <= d; ++i) {
        mpz_class s = 0;
        for (std::size_t j = 0; j < q.shifts.size(); ++j) {
            mpz_class b;
            mpz_bin_ui(b.get_mpz_t(), effective_shift(q, j).get_mpz_t(), static_cast<unsigned long>(i));
            s += q.signs[j] * b;
        }
        if (i < d && s != 0)
            r.vanishes = false;
        if (i == d)
            r.c_d = s;
    }
    return r;
}

std::complex<double> predict_correlation(const Classification &cls, const MeasureSpec &lambda,
                                         const CorrelationQuery &q)
{
    if (cls.case_id == Case::V)
        throw HypothesisUnmet("predictions need case I to IV; reduce case V to progressions first");
    auto ps = power_sum_condition(q, cls.d);
    if (!ps.vanishes)
        return 0.0;
    return lambda.fourier(ps.l_d);
}

std::vector<double> unipotent_orbit_point(const std::vector<double> &y, std::int64_t n)
{
    if (y.empty() || y.size() > static_cast<std::size_t>(default_max_degree) + 1)
        throw std::invalid_argument("unipotent dimension out of range");
    const std::size_t dim = y.size();
    mpz_class nn(static_cast<long>(n));
    std::vector<mpz_class> binom(dim);
    long bits = 0;
    for (std::size_t i = 0; i < dim; ++i) {
        mpz_bin_ui(binom[i].get_mpz_t(), nn.get_mpz_t(), static_cast<unsigned long>(i));
        bits = std::max<long>(bits, static_cast<long>(mpz_sizeinbase(binom[i].get_mpz_t(), 2)));
    }
    // each product of a binomial with a double is exact at this precision
    const mpfr_prec_t prec = bits + 64 + 8;
    std::vector<double> out(dim);
    BigFloat acc(prec), term(prec);
    for (std::size_t i = 0; i < dim; ++i) {
        mpfr_set_zero(acc.get(), 1);
        for (std::size_t j = 0; j <= i; ++j) {
            mpfr_set_d(term.get(), y[i - j], MPFR_RNDN);
            mpfr_mul_z(term.get(), term.get(), binom[j].get_mpz_t(), MPFR_RNDN);
            mpfr_add(acc.get(), acc.get(), term.get(), MPFR_RNDN);
        }
        reduce_mod1(acc);
        out[i] = acc.to_double();
        if (out[i] >= 1.0)
            out[i] = 0.0;
    }
    return out;
}

std::complex<double> unipotent_orbit_phase(const UnipotentModel &model, const std::vector<double> &y,
                                           std::int64_t n)
{
    if (model.d < 0 || model.d > default_max_degree)
        throw std::invalid_argument("unipotent dimension out of range");
    if (y.size() != static_cast<std::size_t>(model.d) + 1)
        throw std::invalid_argument("point must have d + 1 coordinates");
    return unit(unipotent_orbit_point(y, n).back());
}

std::complex<double> unipotent_expected_correlation(const UnipotentModel &model, const CorrelationQuery &q)
{
    auto bc = binom_condition(q, model.d);
    if (!bc.vanishes)
        return 0.0;
    return model.lambda.fourier(bc.c_d);
}

Reconciliation model_reconciliation(const Classification &cls, const MeasureSpec &lambda, const CorrelationQuery &q)
{
    Reconciliation r;
    r.prediction = predict_correlation(cls, lambda, q);
    UnipotentModel model{cls.d, lambda.pushforward(factorial(cls.d).get_si())};
    r.model = unipotent_expected_correlation(model, q);
    r.match = std::abs(r.prediction - r.model) <= 1e-12;
    return r;
}

} // namespace flab
