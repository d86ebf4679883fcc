#pragma once

#include <boost/rational.hpp>

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flab/bigfloat.hpp"
#include "flab/ddouble.hpp"

namespace boost {

// Boost 1.74 defines `Arg == rational` as `rational == Arg`, which C++20
// rewrites back into itself. Exact overloads take precedence.
inline constexpr bool operator==(const rational<std::int64_t> &a, int b)
{
    return a.denominator() == 1 && a.numerator() == b;
}

inline constexpr bool operator==(int b, const rational<std::int64_t> &a) { return a == b; }

} // namespace boost

namespace flab {

using Rational = boost::rational<std::int64_t>;

std::string to_string(const Rational &r);

/// Named irrational constants accepted in coefficients.
enum class Constant { sqrt2, sqrt3, sqrt5, phi, pi, euler_e };

std::string_view constant_name(Constant c);

/// q or q * kappa.
struct ExactCoefficient {
    Rational q{1};
    std::optional<Constant> kappa;

    bool is_rational() const { return !kappa.has_value(); }
};

enum class Rationality { rational, irrational, unknown };

// A Q-linear combination over the basis {1, sqrt2, sqrt3, sqrt5, pi, e}.
// phi is folded into 1/2 + sqrt5/2 so that equal values have equal
// representations. Sums of exact coefficients stay closed this way, and
// rationality is decidable except when both pi and e appear.
class Coefficient {
public:
    static constexpr std::size_t basis_size = 6;

    Coefficient() = default;
    Coefficient(Rational q) { _parts[0] = q; }
    Coefficient(std::int64_t q) : Coefficient(Rational(q)) { }
    Coefficient(const ExactCoefficient &c);

    static Coefficient constant(Constant c, Rational q = Rational(1));

    bool is_zero() const;
    Rationality rationality() const;
    /// The rational part; meaningful when rationality() == rational.
    Rational rational_part() const { return _parts[0]; }
    const std::array<Rational, basis_size> &parts() const { return _parts; }

    /// Sign of the real value; exact for the algebraic part, numeric otherwise.
    int sign() const;

    Coefficient operator+(const Coefficient &o) const;
    Coefficient operator-(const Coefficient &o) const;
    Coefficient operator-() const;
    Coefficient operator*(Rational r) const;
    /// Product of two coefficients; throws Undecidable when the result leaves the basis.
    Coefficient operator*(const Coefficient &o) const;
    bool operator==(const Coefficient &o) const { return _parts == o._parts; }

    double value() const;
    DDouble dd_value() const;
    /// Writes the value rounded to the precision of `out`; returns true iff exact.
    bool mpfr_value(BigFloat &out) const;

    std::string str() const;

private:
    std::array<Rational, basis_size> _parts{};
};

/// c * t^a * (log t)^b with exact rational exponents.
struct Term {
    Coefficient coef;
    Rational a{0};
    Rational b{0};
};

constexpr int default_max_degree = 8;

// Canonical sum of terms, sorted strictly decreasing by (a, b), no zero
// coefficients, leading t-exponent below the degree cap. Immutable after
// construction.
class HardyExpr {
public:
    HardyExpr() = default;

    /// Merges like terms, drops zeros and sorts. Throws GrowthTooLarge if a_lead >= max_degree.
    static HardyExpr canonicalize(std::vector<Term> raw, double t0 = 2.0,
                                  int max_degree = default_max_degree);

    static HardyExpr parse(std::string_view text, double t0 = 2.0,
                           int max_degree = default_max_degree);

    const std::vector<Term> &terms() const { return _terms; }
    bool is_zero() const { return _terms.empty(); }
    const Term &leading() const { return _terms.front(); }
    double t0() const { return _t0; }
    int max_degree() const { return _max_degree; }
    /// First index at which averages start: max(2, ceil(t0)).
    std::int64_t n_start() const;

    HardyExpr operator+(const HardyExpr &o) const;
    HardyExpr operator-(const HardyExpr &o) const;
    HardyExpr scaled(const Coefficient &c) const;
    /// Multiplies by t^a (log t)^b.
    HardyExpr times_monomial(Rational a, Rational b) const;

    /// Evaluation in double precision at a real point t > 1.
    double value(double t) const;

    std::string str() const;

    bool operator==(const HardyExpr &o) const;

private:
    std::vector<Term> _terms;
    double _t0 = 2.0;
    int _max_degree = default_max_degree;
};

/// A constant such as "sqrt2", "3/2" or "1/2 + sqrt5/2"; throws ParseError otherwise.
Coefficient parse_coefficient(std::string_view text);

HardyExpr derivative(const HardyExpr &e, int order = 1);

enum class Growth { precedes, similar, dominates };

struct GrowthRelation {
    Growth order;
    // leading-coefficient ratio num/den, set when order == similar
    Coefficient num;
    Coefficient den;
    double limit = 0.0;

    std::string describe() const;
};

/// Compares growth of nonzero expressions by their leading (a, b).
GrowthRelation growth_compare(const HardyExpr &e1, const HardyExpr &e2);

enum class Case { I, II, III, IV, V };

std::string_view case_name(Case c);

struct Classification {
    Case case_id = Case::I;
    int d = 0;
    std::optional<Coefficient> alpha;       // case IV
    HardyExpr poly_part;                    // case V
    std::int64_t modulus = 1;               // case V
    std::shared_ptr<const Classification> inner; // case V; empty when the remainder decays

    std::string str() const;
};

Classification classify(const HardyExpr &e);

struct FracResult {
    double frac;      // {a(n)} in [0, 1)
    double err_bound; // bound on |frac - exact|, circular
};

/// {a(n)} in MPFR arithmetic at the requested working precision.
/// Throws PrecisionInsufficient when the error bound exceeds 1e-10.
FracResult eval_frac(const HardyExpr &e, std::int64_t n, int precision_bits = 128);

struct BigValue {
    BigFloat value;
    double err_bound; // absolute; zero iff every operation was exact
};

BigValue eval_mpfr(const HardyExpr &e, std::int64_t n, int precision_bits);

// Double-double evaluation at integer points, for streaming use. Each call
// reports an absolute error bound; callers fall back to eval_mpfr when it is
// too coarse for their purpose.
class FastEvaluator {
public:
    explicit FastEvaluator(const HardyExpr &e);

    DDouble value(std::int64_t n, double &err_bound) const;

    /// {a(n)} with an absolute error below 1e-12, using MPFR when needed.
    double frac(std::int64_t n) const;

    const HardyExpr &expr() const { return _expr; }

private:
    enum class PowerKind { zero, integer, half, general };

    struct Prepared {
        DDouble coef;
        double coef_abs;
        Rational a;
        Rational b;
        PowerKind t_kind;
        PowerKind log_kind;
    };

    HardyExpr _expr;
    std::vector<Prepared> _terms;
    bool _needs_log = false;
};

} // namespace flab
