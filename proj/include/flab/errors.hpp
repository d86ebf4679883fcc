#pragma once

#include <stdexcept>
#include <string>

namespace flab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FLAB_ERROR(Name)                                                     \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string &what) : Error(#Name ": " + what) { } \
    }

FLAB_ERROR(ParseError);
FLAB_ERROR(GrowthTooLarge);
FLAB_ERROR(Undecidable);
FLAB_ERROR(PrecisionInsufficient);
FLAB_ERROR(BadWeight);
FLAB_ERROR(BadScheme);
FLAB_ERROR(BadQuery);
FLAB_ERROR(FourierOutOfRange);
FLAB_ERROR(NonIntegerFrequency);
FLAB_ERROR(SearchBudgetExceeded);
FLAB_ERROR(NotIncreasing);
FLAB_ERROR(FloorUndecidable);
FLAB_ERROR(HypothesisUnmet);

#undef FLAB_ERROR

} // namespace flab
