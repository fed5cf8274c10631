// Exception types thrown by the library. Each failure mode gets its own
// class so callers (and the CLI exit-code mapping) can discriminate.
#pragma once

#include <stdexcept>
#include <string>

namespace hdglm {

// Base for all numeric/domain failures (CLI maps these to exit code 2).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Base for caller mistakes: bad arguments, malformed files (CLI exit code 1).
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

#define HDGLM_DEFINE_ERROR(NAME, BASE)                      \
  struct NAME : BASE {                                      \
    explicit NAME(const std::string& msg) : BASE(msg) {}    \
  }

HDGLM_DEFINE_ERROR(InvalidLinkParameter, UsageError);
HDGLM_DEFINE_ERROR(DimensionMismatch, UsageError);
HDGLM_DEFINE_ERROR(OutOfRange, UsageError);
HDGLM_DEFINE_ERROR(ParseError, UsageError);

HDGLM_DEFINE_ERROR(InvalidRate, Error);
HDGLM_DEFINE_ERROR(NonMonotoneLink, Error);
HDGLM_DEFINE_ERROR(BracketFailure, Error);
HDGLM_DEFINE_ERROR(SingularHessian, Error);
HDGLM_DEFINE_ERROR(NoConvergence, Error);
HDGLM_DEFINE_ERROR(MissingTruth, Error);
HDGLM_DEFINE_ERROR(NegativeVariance, Error);
HDGLM_DEFINE_ERROR(DegenerateSignal, Error);
HDGLM_DEFINE_ERROR(OddLink, Error);
HDGLM_DEFINE_ERROR(NoBracket, Error);
HDGLM_DEFINE_ERROR(InsufficientData, Error);
HDGLM_DEFINE_ERROR(RankDeficient, Error);
HDGLM_DEFINE_ERROR(NonPositiveMu, Error);
HDGLM_DEFINE_ERROR(SingularInformation, Error);
HDGLM_DEFINE_ERROR(TooFewSamples, Error);

#undef HDGLM_DEFINE_ERROR

}  // namespace hdglm
