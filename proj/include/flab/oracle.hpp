#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flab/bigfloat.hpp"
#include "flab/correlation.hpp"
#include "flab/hardy.hpp"

namespace flab {

// A probability measure on the circle, known through its Fourier transform
// lambda^(k) = integral of e(k t).
class MeasureSpec {
public:
    enum class Kind { uniform, point_mass, fourier_table };

    static constexpr int alpha_bits = 192;

    static MeasureSpec uniform();
    static MeasureSpec point_mass(const Coefficient &alpha);
    static MeasureSpec point_mass(const BigFloat &alpha);
    /// Entries for 1 <= |k| <= K; negative k may be omitted. Throws std::invalid_argument.
    static MeasureSpec fourier_table(std::map<std::int64_t, std::complex<double>> table);

    Kind kind() const { return _kind; }
    /// alpha reduced to [0, 1), point masses only.
    const BigFloat &alpha() const { return _alpha; }
    std::int64_t table_range() const { return _range; }

    /// lambda^(k); throws FourierOutOfRange beyond a table.
    std::complex<double> fourier(const mpz_class &k) const;
    /// integral of e(q t) for rational q; throws NonIntegerFrequency for tables.
    std::complex<double> fourier(const mpq_class &q) const;

    /// Image under t -> m t mod 1.
    MeasureSpec pushforward(std::int64_t m) const;

    std::string describe() const;

private:
    Kind _kind = Kind::uniform;
    BigFloat _alpha{alpha_bits};
    std::map<std::int64_t, std::complex<double>> _table;
    std::int64_t _range = 0;
};

// X_d = (T^(d+1), lambda x Haar, S_d), S_d(y0, ..., yd) = (y0, y1 + y0, ..., yd + y(d-1)).
struct UnipotentModel {
    int d = 1;
    MeasureSpec lambda = MeasureSpec::uniform();
};

struct PowerSumResult {
    bool vanishes;
    mpz_class l_d; // sum k_j n_j^d
};

struct BinomResult {
    bool vanishes;
    mpq_class c_d; // sum k_j C(n_j, d)
};

/// Shifts are scaled by the query's dilation. 0^0 = 1.
PowerSumResult power_sum_condition(const CorrelationQuery &q, int d);
/// C(n, i) is the polynomial n(n-1)...(n-i+1)/i!, so negative n are allowed.
BinomResult binom_condition(const CorrelationQuery &q, int d);

/// lambda^(l_d) if the power sums below d vanish, else 0. Cases I to IV.
std::complex<double> predict_correlation(const Classification &cls, const MeasureSpec &lambda,
                                         const CorrelationQuery &q);

/// S_d^n y reduced mod 1, coordinate i = sum_(j <= i) C(n, j) y_(i-j), with exact binomials.
std::vector<double> unipotent_orbit_point(const std::vector<double> &y, std::int64_t n);

/// e(sum_i C(n, i) y_(d-i)), the last coordinate of S_d^n y; y has d + 1 components in [0, 1).
std::complex<double> unipotent_orbit_phase(const UnipotentModel &model, const std::vector<double> &y,
                                           std::int64_t n);

/// integral of e(c_d y0) d lambda(y0) if c_0 .. c_(d-1) vanish, else 0.
std::complex<double> unipotent_expected_correlation(const UnipotentModel &model, const CorrelationQuery &q);

struct Reconciliation {
    std::complex<double> prediction;
    std::complex<double> model;
    bool match;
};

/// Compares the prediction under lambda with the torus model under lambda pushed forward by d!.
Reconciliation model_reconciliation(const Classification &cls, const MeasureSpec &lambda, const CorrelationQuery &q);

mpz_class factorial(int d);

} // namespace flab
