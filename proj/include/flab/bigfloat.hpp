#pragma once

#include <mpfr.h>

#include <cstdint>
#include <utility>

#include "flab/ddouble.hpp"

namespace flab {

// Owning wrapper around an mpfr_t. Precision is fixed at construction;
// assignment copies the value with rounding into the target precision.
class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t bits) { mpfr_init2(_v, bits); mpfr_set_zero(_v, 1); }

    BigFloat(mpfr_prec_t bits, double x) : BigFloat(bits) { mpfr_set_d(_v, x, MPFR_RNDN); }

    BigFloat(const BigFloat &other) : BigFloat(mpfr_get_prec(other._v))
    {
        mpfr_set(_v, other._v, MPFR_RNDN);
    }

    BigFloat(BigFloat &&other) noexcept : BigFloat(mpfr_get_prec(other._v))
    {
        mpfr_swap(_v, other._v);
    }

    BigFloat &operator=(const BigFloat &other)
    {
        if (this != &other)
            mpfr_set(_v, other._v, MPFR_RNDN);
        return *this;
    }

    BigFloat &operator=(BigFloat &&other) noexcept
    {
        if (mpfr_get_prec(_v) == mpfr_get_prec(other._v))
            mpfr_swap(_v, other._v);
        else
            mpfr_set(_v, other._v, MPFR_RNDN);
        return *this;
    }

    ~BigFloat() { mpfr_clear(_v); }

    mpfr_ptr get() { return _v; }
    mpfr_srcptr get() const { return _v; }

    mpfr_prec_t precision() const { return mpfr_get_prec(_v); }

    double to_double() const { return mpfr_get_d(_v, MPFR_RNDN); }

    /// Rounds to the nearest double-double.
    DDouble to_ddouble() const
    {
        BigFloat rest(*this);
        double hi = mpfr_get_d(_v, MPFR_RNDN);
        mpfr_sub_d(rest._v, rest._v, hi, MPFR_RNDN);
        return DDouble(hi, mpfr_get_d(rest._v, MPFR_RNDN));
    }

    /// log2 of the magnitude, rounded up; very negative for zero.
    long magnitude_bits() const
    {
        if (mpfr_zero_p(_v))
            return -100000;
        return mpfr_get_exp(_v);
    }

private:
    mpfr_t _v;
};

} // namespace flab
