#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flab/hardy.hpp"
#include "flab/sequence.hpp"

namespace flab {

constexpr std::int64_t max_checkpoint = 1000000000;
constexpr std::int64_t min_checkpoint = 10;

struct CheckpointRule {
    enum class Kind { powers_of, explicit_list };

    Kind kind = Kind::powers_of;
    double gamma = 2.0;
    std::vector<std::int64_t> list;

    static CheckpointRule powers(double gamma) { return {Kind::powers_of, gamma, {}}; }
    static CheckpointRule explicit_points(std::vector<std::int64_t> l)
    {
        return {Kind::explicit_list, 0.0, std::move(l)};
    }
};

// Where averages are reported. A checkpoint N means the first N samples,
// i.e. indices n_start .. n_start + N - 1, except for weighted schemes where
// N is the upper index of the weighted sum.
class AveragingScheme {
public:
    enum class Kind { full, subsequence, weighted };

    /// Throws BadScheme on invalid checkpoints.
    static AveragingScheme full(std::int64_t n_max, CheckpointRule rule = CheckpointRule::powers(2.0));
    static AveragingScheme subsequence(std::vector<std::int64_t> m_k);
    static AveragingScheme weighted(HardyExpr w, std::int64_t n_max,
                                    CheckpointRule rule = CheckpointRule::powers(2.0));

    Kind kind() const { return _kind; }
    std::int64_t n_max() const { return _checkpoints.back(); }
    const std::vector<std::int64_t> &checkpoints() const { return _checkpoints; }
    const std::optional<HardyExpr> &weight() const { return _weight; }

private:
    Kind _kind = Kind::full;
    std::vector<std::int64_t> _checkpoints;
    std::optional<HardyExpr> _weight;
};

/// Checkpoints of a rule up to n_max, validated; n_max is always the last one.
std::vector<std::int64_t> expand_checkpoints(const CheckpointRule &rule, std::int64_t n_max);

struct SeriesPoint {
    std::int64_t n;
    std::complex<double> value;
    std::int64_t samples;
};

struct ComplexSeries {
    std::vector<SeriesPoint> points;
    std::int64_t n_start = 2;

    const SeriesPoint &final() const { return points.back(); }
    /// Columns N, re, im, abs, samples.
    std::string to_csv() const;
};

/// Shortest round-trip decimal, locale independent.
std::string format_double(double x);

ComplexSeries cesaro_average(const ComplexSource &source, const AveragingScheme &scheme);

/// (1/w(N)) sum_{n_start <= n < N} (w(n+1) - w(n)) source(n). Throws BadWeight.
std::complex<double> weighted_average(const ComplexSource &source, const HardyExpr &w, std::int64_t n);

/// Weighted means at every checkpoint of a weighted scheme.
ComplexSeries weighted_series(const ComplexSource &source, const HardyExpr &w,
                              const std::vector<std::int64_t> &checkpoints);

/// Throws BadWeight unless w is eventually increasing and unbounded with n past the threshold.
void check_weight(const HardyExpr &w, std::int64_t n);

using RealSequence = std::function<DDouble(std::int64_t)>;

/// n -> sum_j (-1)^(i-j) C(i, j) a(n + j r).
RealSequence finite_difference(RealSequence a, int r, int i);

RealSequence hardy_values(const HardyExpr &a);

struct PartialSummation {
    std::complex<double> weighted;
    std::complex<double> cesaro;
    double deviation;
};

// Weighted average with w(n) = |Delta_r^d a(n)| against the plain Cesaro mean
// over the same range. Throws BadWeight when r^d a^(d) is not an admissible
// weight.
PartialSummation partial_summation_check(const ComplexSource &source, const HardyExpr &a, int d, int r,
                                         std::int64_t n);

} // namespace flab
