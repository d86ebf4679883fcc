#include "flab/hardy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "flab/errors.hpp"

namespace flab {

std::string to_string(const Rational &r)
{
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string_view constant_name(Constant c)
{
    switch (c) {
    case Constant::sqrt2: return "sqrt2";
    case Constant::sqrt3: return "sqrt3";
    case Constant::sqrt5: return "sqrt5";
    case Constant::phi: return "phi";
    case Constant::pi: return "pi";
    case Constant::euler_e: return "e";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Coefficient

namespace {

// basis slots: 0 -> 1, 1 -> sqrt2, 2 -> sqrt3, 3 -> sqrt5, 4 -> pi, 5 -> e
constexpr std::array<std::string_view, Coefficient::basis_size> basis_names = {
    "", "sqrt2", "sqrt3", "sqrt5", "pi", "e"};

void basis_mpfr(std::size_t slot, BigFloat &out)
{
    switch (slot) {
    case 0: mpfr_set_ui(out.get(), 1, MPFR_RNDN); break;
    case 1: mpfr_sqrt_ui(out.get(), 2, MPFR_RNDN); break;
    case 2: mpfr_sqrt_ui(out.get(), 3, MPFR_RNDN); break;
    case 3: mpfr_sqrt_ui(out.get(), 5, MPFR_RNDN); break;
    case 4: mpfr_const_pi(out.get(), MPFR_RNDN); break;
    case 5:
        mpfr_set_ui(out.get(), 1, MPFR_RNDN);
        mpfr_exp(out.get(), out.get(), MPFR_RNDN);
        break;
    }
}

const std::array<DDouble, Coefficient::basis_size> &basis_dd()
{
    static const std::array<DDouble, Coefficient::basis_size> values = [] {
        std::array<DDouble, Coefficient::basis_size> v;
        BigFloat x(256);
        for (std::size_t i = 0; i < v.size(); ++i) {
            basis_mpfr(i, x);
            v[i] = x.to_ddouble();
        }
        return v;
    }();
    return values;
}

} // namespace

Coefficient::Coefficient(const ExactCoefficient &c)
{
    if (!c.kappa) {
        _parts[0] = c.q;
        return;
    }
    *this = constant(*c.kappa, c.q);
}

Coefficient Coefficient::constant(Constant c, Rational q)
{
    Coefficient r;
    switch (c) {
    case Constant::sqrt2: r._parts[1] = q; break;
    case Constant::sqrt3: r._parts[2] = q; break;
    case Constant::sqrt5: r._parts[3] = q; break;
    case Constant::phi:
        r._parts[0] = q / 2;
        r._parts[3] = q / 2;
        break;
    case Constant::pi: r._parts[4] = q; break;
    case Constant::euler_e: r._parts[5] = q; break;
    }
    return r;
}

bool Coefficient::is_zero() const
{
    return std::all_of(_parts.begin(), _parts.end(), [](const Rational &q) { return q == 0; });
}

Rationality Coefficient::rationality() const
{
    bool has_pi = _parts[4] != 0;
    bool has_e = _parts[5] != 0;
    if (has_pi && has_e)
        return Rationality::unknown;
    if (has_pi || has_e)
        return Rationality::irrational;
    // 1, sqrt2, sqrt3, sqrt5 are linearly independent over Q
    for (std::size_t i = 1; i <= 3; ++i)
        if (_parts[i] != 0)
            return Rationality::irrational;
    return Rationality::rational;
}

int Coefficient::sign() const
{
    if (is_zero())
        return 0;
    BigFloat v(256);
    mpfr_value(v);
    return mpfr_sgn(v.get()) > 0 ? 1 : -1;
}

Coefficient Coefficient::operator+(const Coefficient &o) const
{
    Coefficient r;
    for (std::size_t i = 0; i < basis_size; ++i)
        r._parts[i] = _parts[i] + o._parts[i];
    return r;
}

Coefficient Coefficient::operator-() const
{
    Coefficient r;
    for (std::size_t i = 0; i < basis_size; ++i)
        r._parts[i] = -_parts[i];
    return r;
}

Coefficient Coefficient::operator-(const Coefficient &o) const { return *this + (-o); }

Coefficient Coefficient::operator*(Rational q) const
{
    Coefficient r;
    for (std::size_t i = 0; i < basis_size; ++i)
        r._parts[i] = _parts[i] * q;
    return r;
}

Coefficient Coefficient::operator*(const Coefficient &o) const
{
    Coefficient r;
    for (std::size_t i = 0; i < basis_size; ++i) {
        if (_parts[i] == 0)
            continue;
        for (std::size_t j = 0; j < basis_size; ++j) {
            if (o._parts[j] == 0)
                continue;
            Rational q = _parts[i] * o._parts[j];
            if (i == 0)
                r._parts[j] += q;
            else if (j == 0)
                r._parts[i] += q;
            else if (i == j && i <= 3)
                r._parts[0] += q * Rational(i == 1 ? 2 : i == 2 ? 3 : 5);
            else
                throw Undecidable("product " + str() + " * " + o.str() +
                                  " leaves the coefficient basis");
        }
    }
    return r;
}

double Coefficient::value() const { return static_cast<double>(dd_value()); }

DDouble Coefficient::dd_value() const
{
    const auto &basis = basis_dd();
    DDouble sum;
    for (std::size_t i = 0; i < basis_size; ++i) {
        if (_parts[i] == 0)
            continue;
        DDouble q = DDouble::from_int(_parts[i].numerator()) /
                    DDouble::from_int(_parts[i].denominator());
        sum += i == 0 ? q : q * basis[i];
    }
    return sum;
}

bool Coefficient::mpfr_value(BigFloat &out) const
{
    mpfr_prec_t work = out.precision() + 32;
    BigFloat acc(work), b(work);
    bool exact = true;
    for (std::size_t i = 0; i < basis_size; ++i) {
        if (_parts[i] == 0)
            continue;
        basis_mpfr(i, b);
        if (i != 0)
            exact = false;
        int t1 = mpfr_mul_si(b.get(), b.get(), _parts[i].numerator(), MPFR_RNDN);
        int t2 = mpfr_div_si(b.get(), b.get(), _parts[i].denominator(), MPFR_RNDN);
        int t3 = mpfr_add(acc.get(), acc.get(), b.get(), MPFR_RNDN);
        exact = exact && t1 == 0 && t2 == 0 && t3 == 0;
    }
    int t4 = mpfr_set(out.get(), acc.get(), MPFR_RNDN);
    return exact && t4 == 0;
}

std::string Coefficient::str() const
{
    std::string out;
    for (std::size_t i = 0; i < basis_size; ++i) {
        if (_parts[i] == 0)
            continue;
        if (!out.empty())
            out += " + ";
        if (i == 0)
            out += to_string(_parts[i]);
        else if (_parts[i] == 1)
            out += basis_names[i];
        else
            out += to_string(_parts[i]) + "*" + std::string(basis_names[i]);
    }
    return out.empty() ? "0" : out;
}

// ---------------------------------------------------------------------------
// HardyExpr

namespace {

bool exponent_greater(const Term &x, const Term &y)
{
    return x.a > y.a || (x.a == y.a && x.b > y.b);
}

std::string exponent_str(const Rational &r)
{
    if (r.denominator() == 1 && r.numerator() >= 0)
        return std::to_string(r.numerator());
    return "(" + to_string(r) + ")";
}

} // namespace

HardyExpr HardyExpr::canonicalize(std::vector<Term> raw, double t0, int max_degree)
{
    if (!(t0 >= 2.0))
        throw ParseError("domain start t0 must be >= 2");
    std::map<std::pair<Rational, Rational>, Coefficient> merged;
    for (auto &term : raw) {
        auto key = std::make_pair(term.a, term.b);
        auto it = merged.find(key);
        if (it == merged.end())
            merged.emplace(key, term.coef);
        else
            it->second = it->second + term.coef;
    }
    HardyExpr e;
    e._t0 = t0;
    e._max_degree = max_degree;
    for (auto &[key, coef] : merged)
        if (!coef.is_zero())
            e._terms.push_back(Term{coef, key.first, key.second});
    std::sort(e._terms.begin(), e._terms.end(), exponent_greater);
    if (!e._terms.empty() && e._terms.front().a >= max_degree)
        throw GrowthTooLarge("leading exponent " + to_string(e._terms.front().a) +
                             " is not below the degree cap " + std::to_string(max_degree));
    return e;
}

std::int64_t HardyExpr::n_start() const
{
    return std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(_t0)));
}

HardyExpr HardyExpr::operator+(const HardyExpr &o) const
{
    std::vector<Term> raw = _terms;
    raw.insert(raw.end(), o._terms.begin(), o._terms.end());
    return canonicalize(std::move(raw), std::max(_t0, o._t0), std::max(_max_degree, o._max_degree));
}

HardyExpr HardyExpr::operator-(const HardyExpr &o) const
{
    return *this + o.scaled(Coefficient(-1));
}

HardyExpr HardyExpr::scaled(const Coefficient &c) const
{
    std::vector<Term> raw = _terms;
    for (auto &t : raw)
        t.coef = t.coef * c;
    return canonicalize(std::move(raw), _t0, _max_degree);
}

HardyExpr HardyExpr::times_monomial(Rational a, Rational b) const
{
    std::vector<Term> raw = _terms;
    for (auto &t : raw) {
        t.a += a;
        t.b += b;
    }
    return canonicalize(std::move(raw), _t0, _max_degree);
}

double HardyExpr::value(double t) const
{
    double lt = std::log(t);
    double sum = 0.0;
    for (const auto &term : _terms) {
        double v = term.coef.value();
        if (term.a != 0)
            v *= std::pow(t, boost::rational_cast<double>(term.a));
        if (term.b != 0)
            v *= std::pow(lt, boost::rational_cast<double>(term.b));
        sum += v;
    }
    return sum;
}

std::string HardyExpr::str() const
{
    if (_terms.empty())
        return "0";
    std::string out;
    for (const auto &term : _terms) {
        const auto &parts = term.coef.parts();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (parts[i] == 0)
                continue;
            std::string piece;
            bool has_factor = term.a != 0 || term.b != 0;
            if (i == 0 && has_factor && parts[i] == 1)
                piece = "";
            else if (i == 0 && has_factor && parts[i] == -1)
                piece = "-";
            else if (i == 0)
                piece = to_string(parts[i]);
            else if (parts[i] == 1)
                piece = std::string(basis_names[i]);
            else
                piece = to_string(parts[i]) + "*" + std::string(basis_names[i]);
            auto join = [&piece](const std::string &f) {
                if (!piece.empty() && piece != "-")
                    piece += "*";
                piece += f;
            };
            if (term.a != 0)
                join("t^" + exponent_str(term.a));
            if (term.b != 0)
                join("log(t)^" + exponent_str(term.b));
            if (!out.empty())
                out += " + ";
            out += piece;
        }
    }
    return out;
}

bool HardyExpr::operator==(const HardyExpr &o) const
{
    if (_terms.size() != o._terms.size())
        return false;
    for (std::size_t i = 0; i < _terms.size(); ++i) {
        const auto &x = _terms[i];
        const auto &y = o._terms[i];
        if (x.a != y.a || x.b != y.b || !(x.coef == y.coef))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : _s(text) { }

    std::vector<Term> parse()
    {
        std::vector<Term> terms;
        skip();
        bool negate = false;
        if (peek() == '-') {
            ++_pos;
            negate = true;
        }
        terms.push_back(term(negate));
        while (true) {
            skip();
            if (at_end())
                break;
            char c = peek();
            if (c != '+' && c != '-')
                fail("expected '+' between terms");
            ++_pos;
            terms.push_back(term(c == '-'));
        }
        return terms;
    }

private:
    Term term(bool negate)
    {
        Term t;
        t.coef = Coefficient(1);
        bool have_rat = false, have_const = false, have_factor = false;
        while (true) {
            skip();
            if (at_end())
                fail("unexpected end of expression");
            char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '(' || c == '-') {
                if (have_rat || have_const || have_factor)
                    fail("numeric coefficient must come first in a term");
                t.coef = Coefficient(c == '(' ? paren_rational() : rational());
                have_rat = true;
            } else if (std::isalpha(static_cast<unsigned char>(c))) {
                std::string id = identifier();
                if (id == "t") {
                    t.a += exponent();
                    have_factor = true;
                } else if (id == "log") {
                    expect('(');
                    skip();
                    if (identifier() != "t")
                        fail("log takes the argument t");
                    expect(')');
                    t.b += exponent();
                    have_factor = true;
                } else {
                    if (have_const || have_factor)
                        fail("constant '" + id + "' must follow the rational coefficient");
                    Constant k = constant_from(id);
                    t.coef = t.coef * Coefficient::constant(k);
                    have_const = true;
                }
            } else {
                fail(std::string("unexpected '") + c + "'");
            }
            skip();
            if (at_end() || peek() != '*')
                break;
            ++_pos;
        }
        if (negate)
            t.coef = -t.coef;
        return t;
    }

    Rational exponent()
    {
        skip();
        if (at_end() || peek() != '^')
            return Rational(1);
        ++_pos;
        skip();
        if (!at_end() && peek() == '(')
            return paren_rational();
        Rational r(integer());
        skip();
        if (!at_end() && peek() == '/')
            fail("fractional exponents must be parenthesized, e.g. t^(3/2)");
        return r;
    }

    Rational paren_rational()
    {
        expect('(');
        Rational r = rational();
        expect(')');
        return r;
    }

    Rational rational()
    {
        std::int64_t num = integer();
        skip();
        if (!at_end() && peek() == '/') {
            ++_pos;
            std::int64_t den = integer();
            if (den == 0)
                fail("zero denominator");
            return Rational(num, den);
        }
        return Rational(num);
    }

    std::int64_t integer()
    {
        skip();
        bool neg = false;
        if (!at_end() && peek() == '-') {
            neg = true;
            ++_pos;
        }
        std::size_t start = _pos;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
            ++_pos;
        if (start == _pos)
            fail("expected an integer");
        std::int64_t v = std::stoll(std::string(_s.substr(start, _pos - start)));
        return neg ? -v : v;
    }

    std::string identifier()
    {
        std::size_t start = _pos;
        while (!at_end() && std::isalnum(static_cast<unsigned char>(peek())))
            ++_pos;
        if (start == _pos)
            fail("expected an identifier");
        return std::string(_s.substr(start, _pos - start));
    }

    Constant constant_from(const std::string &id)
    {
        if (id == "sqrt2") return Constant::sqrt2;
        if (id == "sqrt3") return Constant::sqrt3;
        if (id == "sqrt5") return Constant::sqrt5;
        if (id == "phi") return Constant::phi;
        if (id == "pi") return Constant::pi;
        if (id == "e") return Constant::euler_e;
        fail("unknown identifier '" + id + "'");
    }

    void expect(char c)
    {
        skip();
        if (at_end() || peek() != c)
            fail(std::string("expected '") + c + "'");
        ++_pos;
    }

    void skip()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek())))
            ++_pos;
    }

    bool at_end() const { return _pos >= _s.size(); }
    char peek() const { return _s[_pos]; }

    [[noreturn]] void fail(const std::string &msg) const
    {
        throw ParseError(msg + " at offset " + std::to_string(_pos) + " in \"" + std::string(_s) + "\"");
    }

    std::string_view _s;
    std::size_t _pos = 0;
};

} // namespace

HardyExpr HardyExpr::parse(std::string_view text, double t0, int max_degree)
{
    return canonicalize(Parser(text).parse(), t0, max_degree);
}

Coefficient parse_coefficient(std::string_view text)
{
    const HardyExpr e = HardyExpr::parse(text);
    if (e.is_zero())
        return Coefficient();
    if (e.terms().size() != 1 || e.leading().a != 0 || e.leading().b != 0)
        throw ParseError("'" + std::string(text) + "' is not a constant");
    return e.leading().coef;
}

// ---------------------------------------------------------------------------
// Calculus and growth

HardyExpr derivative(const HardyExpr &e, int order)
{
    if (order < 0 || order > e.max_degree() + 2)
        throw std::invalid_argument("derivative order out of range");
    HardyExpr cur = e;
    for (int k = 0; k < order; ++k) {
        std::vector<Term> raw;
        for (const auto &t : cur.terms()) {
            // d/dt c t^a L^b = c a t^(a-1) L^b + c b t^(a-1) L^(b-1)
            if (t.a != 0)
                raw.push_back(Term{t.coef * t.a, t.a - 1, t.b});
            if (t.b != 0)
                raw.push_back(Term{t.coef * t.b, t.a - 1, t.b - 1});
        }
        cur = HardyExpr::canonicalize(std::move(raw), e.t0(), e.max_degree());
    }
    return cur;
}

std::string GrowthRelation::describe() const
{
    switch (order) {
    case Growth::precedes: return "precedes";
    case Growth::dominates: return "dominates";
    case Growth::similar: return "similar(limit " + num.str() + " / " + den.str() + ")";
    }
    return "?";
}

GrowthRelation growth_compare(const HardyExpr &e1, const HardyExpr &e2)
{
    if (e1.is_zero() || e2.is_zero())
        throw std::invalid_argument("growth_compare requires nonzero expressions");
    const Term &x = e1.leading();
    const Term &y = e2.leading();
    GrowthRelation rel;
    if (exponent_greater(x, y)) {
        rel.order = Growth::dominates;
    } else if (exponent_greater(y, x)) {
        rel.order = Growth::precedes;
    } else {
        rel.order = Growth::similar;
        rel.num = x.coef;
        rel.den = y.coef;
        rel.limit = static_cast<double>(x.coef.dd_value() / y.coef.dd_value());
    }
    return rel;
}

// ---------------------------------------------------------------------------
// Classification

std::string_view case_name(Case c)
{
    switch (c) {
    case Case::I: return "I";
    case Case::II: return "II";
    case Case::III: return "III";
    case Case::IV: return "IV";
    case Case::V: return "V";
    }
    return "?";
}

std::string Classification::str() const
{
    std::ostringstream os;
    os << "case " << case_name(case_id) << " d=" << d;
    if (alpha)
        os << " alpha=" << alpha->str();
    if (case_id == Case::V) {
        os << " poly=" << poly_part.str() << " r=" << modulus;
        os << " inner=" << (inner ? "(" + inner->str() + ")" : std::string("none"));
    }
    return os.str();
}

namespace {

bool decays(const Term &t) { return t.a < 0 || (t.a == 0 && t.b < 0); }

std::int64_t floor_rational(const Rational &r)
{
    std::int64_t q = r.numerator() / r.denominator();
    if (r.numerator() < 0 && q * r.denominator() != r.numerator())
        --q;
    return q;
}

} // namespace

Classification classify(const HardyExpr &e)
{
    const auto &terms = e.terms();
    std::vector<Term> poly;
    std::size_t i = 0;
    Classification out;
    bool resolved = false;
    for (; i < terms.size(); ++i) {
        const Term &t = terms[i];
        if (decays(t))
            break;
        if (t.a.denominator() != 1) {
            out.case_id = Case::I;
            out.d = static_cast<int>(floor_rational(t.a));
        } else if (t.b > 1) {
            out.case_id = Case::I;
            out.d = static_cast<int>(t.a.numerator());
        } else if (t.b < 0) {
            out.case_id = Case::I;
            out.d = static_cast<int>(t.a.numerator()) - 1;
        } else if (t.b == 1) {
            out.case_id = Case::II;
            out.d = static_cast<int>(t.a.numerator());
        } else if (t.b > 0) {
            out.case_id = Case::III;
            out.d = static_cast<int>(t.a.numerator());
        } else {
            switch (t.coef.rationality()) {
            case Rationality::unknown:
                throw Undecidable("cannot decide irrationality of coefficient " + t.coef.str() +
                                  " of t^" + to_string(t.a));
            case Rationality::irrational:
                out.case_id = Case::IV;
                out.d = static_cast<int>(t.a.numerator());
                out.alpha = t.coef;
                break;
            case Rationality::rational:
                poly.push_back(t);
                continue;
            }
        }
        resolved = true;
        break;
    }
    if (poly.empty()) {
        if (resolved)
            return out;
        // the whole expression tends to zero: trivial wrapper
        Classification v;
        v.case_id = Case::V;
        v.poly_part = HardyExpr::canonicalize({}, e.t0(), e.max_degree());
        return v;
    }
    Classification v;
    v.case_id = Case::V;
    v.poly_part = HardyExpr::canonicalize(poly, e.t0(), e.max_degree());
    v.d = static_cast<int>(poly.front().a.numerator());
    std::int64_t r = 1;
    for (const auto &t : poly)
        r = std::lcm(r, t.coef.rational_part().denominator());
    v.modulus = r;
    if (resolved) {
        std::vector<Term> rest(terms.begin() + static_cast<std::ptrdiff_t>(poly.size()), terms.end());
        v.inner = std::make_shared<const Classification>(
            classify(HardyExpr::canonicalize(std::move(rest), e.t0(), e.max_degree())));
    }
    return v;
}

} // namespace flab
