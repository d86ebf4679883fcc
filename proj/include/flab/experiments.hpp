#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flab/averaging.hpp"
#include "flab/correlation.hpp"
#include "flab/systems.hpp"

namespace flab {

struct Verdict {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> params;
    std::complex<double> value;
    std::complex<double> reference;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

/// Throws HypothesisUnmet unless a is in case I, or case II with d >= 1.
void require_ortho_scope(const HardyExpr &a);
/// Throws HypothesisUnmet unless t^(d+eps) < a < t^(d+1): case I with a non-integer leading exponent.
void require_power_scope(const HardyExpr &a);

struct OrthoResult {
    ComplexSeries series;
    Verdict verdict;
};

/// Means of e(a(n)) w(n), or e([a(n)] alpha) w(n) when floor_alpha is set; passes iff |final| <= tol.
OrthoResult ortho_test(const HardyExpr &a, const WeightSpec &w, const AveragingScheme &scheme, double tol,
                       const std::optional<Coefficient> &floor_alpha = std::nullopt);

struct SstRow {
    CorrelationQuery query;
    std::vector<std::complex<double>> values; // one per dilation
    double deviation;
};

struct SstResult {
    std::vector<int> dilations;
    std::vector<SstRow> rows;
    double deviation;
    std::size_t worst;
    Verdict verdict;
};

/// Correlations of every query at every dilation in one pass; deviation is the
/// largest gap between two dilations at the final checkpoint.
SstResult sst_invariance(const ComplexSource &source, const std::vector<CorrelationQuery> &queries,
                         const std::vector<int> &dilations, const AveragingScheme &scheme, double tol);

struct MultiAverage {
    ComplexSeries series;
    std::complex<double> predicted;
    Verdict verdict;
};

/// Means of e(f {n alpha_T}) e(g {[a(n)] alpha_S}) at x = 0; predicted 1 when f = g = 0, else 0.
MultiAverage multi_ergodic_average(const RotationNumber &alpha_t, const RotationNumber &alpha_s, std::int64_t f,
                                   std::int64_t g, const HardyExpr &a, const AveragingScheme &scheme, double tol);

/// Lebesgue measure of the intersection of three arcs [u, v) - s_i on the circle.
double arc_intersection(double u, double v, double s1, double s2);

struct Recurrence {
    ComplexSeries series; // real parts
    double bound;         // (v - u)^3
    Verdict verdict;
};

/// Means of m(A n (A - {n alpha_T}) n (A - {s(n) alpha_S})) for A = [u, v).
/// Passes iff within tol of (v - u)^3 and above it less `slack`.
Recurrence recurrence_average(const RotationNumber &alpha_t, const RotationNumber &alpha_s, double u, double v,
                              TimeFn s_time, const AveragingScheme &scheme, double tol, double slack);

/// The same with s(n) = [a(n)].
Recurrence recurrence_average(const RotationNumber &alpha_t, const RotationNumber &alpha_s, double u, double v,
                              const HardyExpr &a, const AveragingScheme &scheme, double tol, double slack);

struct EquidistReport {
    std::vector<std::complex<double>> weyl;  // mean e(k a(b(n))), k = 1 .. K
    std::vector<std::complex<double>> floor; // mean e(k [a(b(n))] alpha)
    double weyl_sup;
    double floor_sup;
    std::map<int, std::vector<double>> residues; // q -> frequency of each class of [a(b(n))] mod q
    double residue_deviation;
    Verdict verdict;
};

/// Weyl means and residue frequencies along n -> a(b(n)) over N terms, from the
/// first n with b(n) in the domain of a.
EquidistReport equidist_along(const HardyExpr &a, const BeattySequence &b, const RotationNumber &alpha, int k_max,
                              std::int64_t n, double tol, double residue_tol, int q_max = 5);

struct JointFactorization {
    std::complex<double> joint;
    std::complex<double> product;
    double deviation;
    Verdict verdict;
};

/// Joint correlation of (e(a(n)), e(alpha a(n))) against the product of the
/// two single correlations. Throws HypothesisUnmet for rational alpha.
JointFactorization joint_factorization_test(const HardyExpr &a, const Coefficient &alpha, const CorrelationQuery &q1,
                                            const CorrelationQuery &q2, const AveragingScheme &scheme, double tol);

struct FloorCorrelation {
    ComplexSeries series;
    double crosscheck; // largest per-term gap between the two evaluation paths
    double drift;      // |value(N) - value at the last checkpoint <= N / 10|
    Verdict verdict;
};

/// Correlation of e([a(n)] alpha) computed as e(a(n) alpha) e(-{a(n)} alpha).
FloorCorrelation floor_sequence_correlation(const HardyExpr &a, const Coefficient &alpha, const CorrelationQuery &q,
                                            const AveragingScheme &scheme, double tol);

} // namespace flab
