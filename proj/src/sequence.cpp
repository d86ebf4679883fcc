#include "flab/sequence.hpp"

#include <cmath>
#include <numbers>

namespace flab {

std::complex<double> unit(double x)
{
    // quarter turns are applied exactly; the remainder lies in [-1/8, 1/8]
    x -= std::nearbyint(x);
    const double q = std::nearbyint(4.0 * x);
    const double t = 2.0 * std::numbers::pi * (x - 0.25 * q);
    const double c = std::cos(t);
    const double s = std::sin(t);
    switch (static_cast<int>(q)) {
    case 1: return {-s, c};
    case 2:
    case -2: return {-c, -s};
    case -1: return {s, -c};
    default: return {c, s};
    }
}

void ComplexSource::fill(std::int64_t n0, std::size_t count, double *re, double *im) const
{
    for (std::size_t i = 0; i < count; ++i) {
        auto z = at(n0 + static_cast<std::int64_t>(i));
        re[i] = z.real();
        im[i] = z.imag();
    }
}

void CircleSource::fill(std::int64_t n0, std::size_t count, double *x) const
{
    for (std::size_t i = 0; i < count; ++i)
        x[i] = at(n0 + static_cast<std::int64_t>(i));
}

namespace {

class FnSource : public ComplexSource {
public:
    FnSource(ComplexFn fn, std::int64_t start) : _fn(std::move(fn)), _start(start) { }
    std::int64_t start() const override { return _start; }
    std::complex<double> at(std::int64_t n) const override { return _fn(n); }

private:
    ComplexFn _fn;
    std::int64_t _start;
};

class FnCircle : public CircleSource {
public:
    FnCircle(CircleFn fn, std::int64_t start) : _fn(std::move(fn)), _start(start) { }
    std::int64_t start() const override { return _start; }
    double at(std::int64_t n) const override
    {
        double x = _fn(n);
        x -= std::floor(x);
        return x >= 1.0 ? 0.0 : x;
    }

private:
    CircleFn _fn;
    std::int64_t _start;
};

} // namespace

std::shared_ptr<const ComplexSource> make_source(ComplexFn fn, std::int64_t start)
{
    return std::make_shared<FnSource>(std::move(fn), start);
}

std::shared_ptr<const CircleSource> make_circle_source(CircleFn fn, std::int64_t start)
{
    return std::make_shared<FnCircle>(std::move(fn), start);
}

} // namespace flab
