#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "flab/ddouble.hpp"

namespace flab {

/// Sets the worker count for all reductions; 0 means hardware concurrency.
void set_thread_count(int n);
int thread_count();

constexpr std::int64_t block_size = 4096;
constexpr int lane_count = 8;

struct DDComplex {
    DDouble re;
    DDouble im;

    DDComplex &operator+=(const DDComplex &o)
    {
        re += o.re;
        im += o.im;
        return *this;
    }
    std::complex<double> value() const { return {static_cast<double>(re), static_cast<double>(im)}; }
};

// Compensated sums for `width` complex accumulators, eight lanes each. The
// lane of sample index i is i mod 8, so the summation order inside a lane
// depends only on the sample indices that were added.
class LaneSums {
public:
    explicit LaneSums(std::size_t width = 0) { reset(width); }

    void reset(std::size_t width);
    std::size_t width() const { return _width; }

    void add(std::size_t acc, std::int64_t index, double re, double im)
    {
        const std::size_t base = acc * 4 * lane_count + static_cast<std::size_t>(index & (lane_count - 1));
        add_compensated(_v[base], _v[base + lane_count], re);
        add_compensated(_v[base + 2 * lane_count], _v[base + 3 * lane_count], im);
    }

    // Adds eight consecutive samples, starting at a multiple of 8.
    void add8(std::size_t acc, const double *re, const double *im)
    {
        double *s = &_v[acc * 4 * lane_count];
        for (int l = 0; l < lane_count; ++l)
            add_compensated(s[l], s[lane_count + l], re[l]);
        for (int l = 0; l < lane_count; ++l)
            add_compensated(s[2 * lane_count + l], s[3 * lane_count + l], im[l]);
    }

    /// Lanes combined in double-double, in fixed order.
    DDComplex combined(std::size_t acc) const;

private:
    static void add_compensated(double &sum, double &err, double x)
    {
        double s = sum + x;
        double bb = s - sum;
        err += (sum - (s - bb)) + (x - bb);
        sum = s;
    }

    std::size_t _width = 0;
    std::vector<double> _v; // per accumulator: re sums, re errs, im sums, im errs
};

// Fills `sums` with the samples of indices [begin, end). Called concurrently
// on disjoint ranges; must be a pure function of the range.
using BlockKernel = std::function<void(std::int64_t begin, std::int64_t end, LaneSums &sums)>;

// Sums sample indices [0, total) into `width` accumulators and returns the
// partial sums over [0, stops[k]) for each stop. Stops must be strictly
// increasing, in (0, total]. Blocks of 4096 samples are reduced in a fixed
// pairwise tree, so results do not depend on the thread count.
std::vector<std::vector<DDComplex>> reduce_blocks(std::size_t width, std::int64_t total,
                                                  const std::vector<std::int64_t> &stops,
                                                  const BlockKernel &kernel);

/// Runs fn(i) for i in [0, count) on the worker pool; fn must not throw.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)> &fn);

} // namespace flab
