#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flab/bigfloat.hpp"
#include "flab/hardy.hpp"
#include "flab/oracle.hpp"
#include "flab/sequence.hpp"

namespace flab {

constexpr int rotation_bits = 192;

// A rotation number held at 192 bits, with a double-double copy for the
// streaming paths.
class RotationNumber {
public:
    RotationNumber() = default;
    explicit RotationNumber(const Coefficient &alpha);
    explicit RotationNumber(double alpha);

    const BigFloat &big() const { return _big; }
    DDouble dd() const { return _dd; }
    double value() const { return static_cast<double>(_dd); }
    /// True when the value came from a coefficient that is exactly rational.
    bool rational() const { return _rational; }

    /// {y + t alpha}.
    double orbit(double y, std::int64_t t) const;

private:
    BigFloat _big{rotation_bits};
    DDouble _dd;
    bool _rational = false;
};

// A rotation x -> x + alpha, a product of systems, or a unipotent torus
// model S_d. Coordinates of the product are those of the factors in order.
class TorusSystem {
public:
    enum class Kind { rotation, product, unipotent };

    static TorusSystem rotation(RotationNumber alpha, double y = 0.0);
    static TorusSystem product(std::vector<TorusSystem> factors);
    static TorusSystem unipotent(UnipotentModel model, std::vector<double> y);

    Kind kind() const { return _kind; }
    int dimension() const;
    const RotationNumber &alpha() const { return _alpha; }
    const std::vector<TorusSystem> &factors() const { return _factors; }
    const std::vector<double> &initial_point() const { return _y; }
    const UnipotentModel &model() const { return _model; }

    /// Coordinates of S^t y, each in [0, 1), in closed form.
    std::vector<double> point_at(std::int64_t t) const;

    std::string describe() const;

private:
    Kind _kind = Kind::rotation;
    RotationNumber _alpha;
    std::vector<TorusSystem> _factors;
    UnipotentModel _model;
    std::vector<double> _y{0.0};
};

using TimeFn = std::function<std::int64_t(std::int64_t)>;

/// n -> e(sum_i m_i x_i) with x = S^time(n) y.
std::shared_ptr<const ComplexSource> orbit_sample(const TorusSystem &sys, TimeFn time,
                                                  std::vector<std::int64_t> frequencies, std::int64_t start = 2);

/// [a(n)], deciding the floor at 128, 256 and 512 bits. Throws FloorUndecidable.
std::int64_t floor_time(const HardyExpr &a, std::int64_t n, int precision_bits = 128);

/// n -> [a(n)] with a double-double fast path.
TimeFn floor_times(const HardyExpr &a, int precision_bits = 128);

// n -> [n alpha + beta] for alpha >= 1.
class BeattySequence {
public:
    /// Throws NotIncreasing when alpha < 1.
    BeattySequence(const Coefficient &alpha, double beta);

    std::int64_t operator()(std::int64_t n) const;

    const Coefficient &alpha() const { return _alpha; }
    double beta() const { return _beta; }

private:
    Coefficient _alpha;
    double _beta;
    DDouble _dd;
};

std::int64_t beatty(const Coefficient &alpha, double beta, std::int64_t n);

/// Counter-based splitmix64 sign: +1 when the top bit is clear.
int bernoulli_weight(std::uint64_t seed, std::int64_t n);

struct WeightSpec {
    enum class Kind { exp_linear, exp_quadratic, riemann_sample, bernoulli, floor_power };

    Kind kind = Kind::exp_linear;
    Coefficient alpha;     // exp_linear, exp_quadratic, riemann_sample, floor_power
    double u = 0.0;        // riemann_sample interval [u, v)
    double v = 0.0;
    std::uint64_t seed = 0;
    HardyExpr a;           // floor_power

    static WeightSpec exp_linear(Coefficient alpha) { return {Kind::exp_linear, alpha, 0, 0, 0, {}}; }
    static WeightSpec exp_quadratic(Coefficient beta) { return {Kind::exp_quadratic, beta, 0, 0, 0, {}}; }
    static WeightSpec riemann_sample(Coefficient alpha, double u, double v)
    {
        return {Kind::riemann_sample, alpha, u, v, 0, {}};
    }
    static WeightSpec bernoulli(std::uint64_t seed) { return {Kind::bernoulli, {}, 0, 0, seed, {}}; }
    static WeightSpec floor_power(HardyExpr a, Coefficient alpha) { return {Kind::floor_power, alpha, 0, 0, 0, a}; }

    std::string describe() const;
};

// exp_linear: e(n alpha); exp_quadratic: e(n^2 beta); riemann_sample: +1 if
// {n alpha} in [u, v), else -1; bernoulli: the sign above; floor_power:
// e([a(n)] alpha).
std::shared_ptr<const ComplexSource> make_weight(const WeightSpec &w);

} // namespace flab
