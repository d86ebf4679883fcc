#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "flab/averaging.hpp"
#include "flab/hardy.hpp"
#include "flab/sequence.hpp"

namespace flab {

constexpr int default_bins = 1024;
constexpr int default_frequencies = 16;
constexpr int max_bins = 1 << 16;
constexpr int max_frequencies = 64;

// Histogram of a sequence on [0, 1) with exact counts, and its Fourier
// coefficients computed from the raw samples.
struct EmpiricalMeasure {
    std::vector<std::int64_t> bins;
    std::int64_t total = 0;
    std::vector<std::complex<double>> fourier; // k = 1 .. K

    int bin_count() const { return static_cast<int>(bins.size()); }
    int max_frequency() const { return static_cast<int>(fourier.size()); }

    /// lambda^(k) for |k| <= K; throws FourierOutOfRange beyond.
    std::complex<double> coefficient(int k) const;
    /// lambda^(k) with every sample moved to the center of its bin.
    std::complex<double> coefficient_from_bins(int k) const;
    /// Fraction of samples in bins [first, last).
    double mass(int first, int last) const;

    /// Measure of the concatenated sample ranges; counts are exact.
    EmpiricalMeasure merged(const EmpiricalMeasure &o) const;

    /// Columns bin_lo, mass.
    std::string histogram_csv() const;
    /// Columns k, re, im, abs for k = 1 .. K.
    std::string fourier_csv() const;
};

struct MeasurePoint {
    std::int64_t n;
    EmpiricalMeasure measure;
};

/// Measures of the first N samples at every checkpoint. B a power of two up to 2^16, K <= 64.
std::vector<MeasurePoint> build_empirical_measure(const CircleSource &source, const AveragingScheme &scheme,
                                                  int bins = default_bins, int frequencies = default_frequencies);

/// c = a^(d) / d! with d from the classification of a. Throws HypothesisUnmet in case V.
HardyExpr derivative_sequence(const HardyExpr &a, const Classification &cls);

/// Empirical measures of {c(n)}, c = a^(d) / d!.
std::vector<MeasurePoint> lambda_from_expr(const HardyExpr &a, const AveragingScheme &scheme,
                                           int bins = default_bins, int frequencies = default_frequencies);

struct UniformityResult {
    bool pass;
    int worst_k;
    double worst_value;
};

/// Passes iff sup over 1 <= k <= K of |lambda^(k)| <= tol.
UniformityResult uniformity_test(const EmpiricalMeasure &m, int k_max, double tol);

/// Mass of the bins whose center lies within `window` of alpha on the circle.
double concentration_test(const EmpiricalMeasure &m, double alpha, double window);

struct DensityResult {
    bool pass;
    double lo;    // worst dyadic interval [lo, hi)
    double hi;
    double ratio; // its mass over its length
};

/// Passes iff mass(I) <= C |I| on every dyadic interval I with |I| >= 8 / B.
DensityResult density_bound_check(const EmpiricalMeasure &m, double c);

constexpr std::int64_t default_search_budget = 1000000000;

/// The `count` smallest N >= n_start with {c(N)} within eps of alpha, for
/// eventually monotone c. Throws SearchBudgetExceeded.
std::vector<std::int64_t> find_checkpoint_times(const HardyExpr &c, double alpha, double eps, int count,
                                                std::int64_t budget = default_search_budget);

/// Real t, one per crossing, with {c(t)} = alpha; for hitting times beyond int64.
std::vector<double> find_crossing_reals(const HardyExpr &c, double alpha, int count,
                                        std::int64_t budget = default_search_budget);

} // namespace flab
