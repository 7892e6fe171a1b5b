#pragma once

#include <stdexcept>
#include <string>

namespace evobound {

// One exception type per failure mode of the public API. All carry a message
// with the offending values; none are used for control flow inside the library.

#define EVOBOUND_ERROR(Name)                                  \
  struct Name : std::runtime_error {                          \
    explicit Name(const std::string& msg)                     \
        : std::runtime_error(std::string(#Name) + ": " + msg) {} \
  }

EVOBOUND_ERROR(NotHermitian);
EVOBOUND_ERROR(NotUnitary);
EVOBOUND_ERROR(DimMismatch);
EVOBOUND_ERROR(BranchAmbiguity);
EVOBOUND_ERROR(OutOfSchedule);
EVOBOUND_ERROR(ToleranceNotMet);
EVOBOUND_ERROR(GridMismatch);
EVOBOUND_ERROR(DegenerateGap);
EVOBOUND_ERROR(LevelCrossing);
EVOBOUND_ERROR(MViolated);
EVOBOUND_ERROR(SmoothnessUnavailable);
EVOBOUND_ERROR(EmptySequence);
EVOBOUND_ERROR(NoErgodicLimit);
EVOBOUND_ERROR(KappaTooLarge);
EVOBOUND_ERROR(Inconclusive);
EVOBOUND_ERROR(UnknownScenario);
EVOBOUND_ERROR(BadParam);

#undef EVOBOUND_ERROR

}  // namespace evobound
