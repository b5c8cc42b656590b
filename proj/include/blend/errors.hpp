#pragma once

#include <stdexcept>
#include <string>

namespace blend {

// Precondition covers hypothesis violations and invalid inputs; Numerical
// covers iterations and root finders that failed to deliver.
enum class ErrorClass { Precondition, Numerical };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorClass cls, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)), cls_(cls) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return cls_; }

private:
    std::string kind_;
    ErrorClass cls_;
};

#define BLEND_ERROR(Name, Cls)                                              \
    struct Name : Error {                                                   \
        explicit Name(const std::string& detail = "")                       \
            : Error(#Name, ErrorClass::Cls, detail) {}                      \
    };

BLEND_ERROR(InvalidArgument, Precondition)
BLEND_ERROR(NonFiniteSample, Numerical)
BLEND_ERROR(InvalidGrid, Precondition)
BLEND_ERROR(BranchExplosion, Precondition)
BLEND_ERROR(NoBranch, Precondition)
BLEND_ERROR(Inconclusive, Numerical)
BLEND_ERROR(NoConvergence, Numerical)
BLEND_ERROR(SlopeBlowup, Numerical)
BLEND_ERROR(DenominatorNonpositive, Precondition)
BLEND_ERROR(OutOfDomain, Precondition)
BLEND_ERROR(EpsZero, Precondition)
BLEND_ERROR(GeometryUnverified, Precondition)
BLEND_ERROR(NotContracting, Numerical)
BLEND_ERROR(NoEnteringComponent, Numerical)
BLEND_ERROR(RootFindingFailure, Numerical)
BLEND_ERROR(NotAttracting, Precondition)
BLEND_ERROR(OutOfViewport, Precondition)
BLEND_ERROR(Undersampled, Numerical)
BLEND_ERROR(ZeroOnLoop, Numerical)
BLEND_ERROR(LoopHitsBand, Precondition)

#undef BLEND_ERROR

// Carries the name of the failing hypothesis clause, e.g. "|m|" or "arg m".
struct HypothesisViolation : Error {
    explicit HypothesisViolation(std::string clause_, const std::string& detail = "")
        : Error("HypothesisViolation", ErrorClass::Precondition,
                clause_ + (detail.empty() ? "" : " (" + detail + ")")),
          clause(std::move(clause_)) {}
    std::string clause;
};

}  // namespace blend
