#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>

#include "flab/hardy.hpp"

namespace flab {

/// e(x) = exp(2 pi i x).
std::complex<double> unit(double x);

// A bounded complex sequence indexed by n >= start(). Implementations are
// pure functions of n so that disjoint ranges can be filled concurrently.
class ComplexSource {
public:
    virtual ~ComplexSource() = default;

    virtual std::int64_t start() const { return 2; }
    virtual void fill(std::int64_t n0, std::size_t count, double *re, double *im) const;
    virtual std::complex<double> at(std::int64_t n) const = 0;
};

// A sequence of points of the circle, as representatives in [0, 1).
class CircleSource {
public:
    virtual ~CircleSource() = default;

    virtual std::int64_t start() const { return 2; }
    virtual void fill(std::int64_t n0, std::size_t count, double *x) const;
    virtual double at(std::int64_t n) const = 0;
};

using ComplexFn = std::function<std::complex<double>(std::int64_t)>;
using CircleFn = std::function<double(std::int64_t)>;

std::shared_ptr<const ComplexSource> make_source(ComplexFn fn, std::int64_t start = 2);
std::shared_ptr<const CircleSource> make_circle_source(CircleFn fn, std::int64_t start = 2);

/// n -> e(a(n)).
class HardyPhase : public ComplexSource {
public:
    explicit HardyPhase(const HardyExpr &a) : _eval(a) { }

    std::int64_t start() const override { return _eval.expr().n_start(); }
    std::complex<double> at(std::int64_t n) const override { return unit(_eval.frac(n)); }

private:
    FastEvaluator _eval;
};

/// n -> {a(n)}.
class HardyFrac : public CircleSource {
public:
    explicit HardyFrac(const HardyExpr &a) : _eval(a) { }

    std::int64_t start() const override { return _eval.expr().n_start(); }
    double at(std::int64_t n) const override { return _eval.frac(n); }

private:
    FastEvaluator _eval;
};

} // namespace flab
