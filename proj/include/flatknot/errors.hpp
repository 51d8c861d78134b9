#pragma once

#include <stdexcept>
#include <string>

namespace flatknot {

// All library failures derive from Error; the what() string starts with the
// error kind so CLI output and tests can match on it.
struct Error : std::runtime_error {
    explicit Error(const std::string& kind, const std::string& detail)
        : std::runtime_error(detail.empty() ? kind : kind + ": " + detail), kind_(kind) {}
    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

#define FLATKNOT_ERROR(Name)                                              \
    struct Name : Error {                                                 \
        explicit Name(const std::string& detail = "") : Error(#Name, detail) {} \
    }

FLATKNOT_ERROR(NonGeneric);
FLATKNOT_ERROR(DegenerateCurve);
FLATKNOT_ERROR(InconsistentLift);
FLATKNOT_ERROR(MissingOvers);
FLATKNOT_ERROR(RealizationFailed);
FLATKNOT_ERROR(BadToken);
FLATKNOT_ERROR(UnbalancedCode);
FLATKNOT_ERROR(SignMismatch);
FLATKNOT_ERROR(NotRealizable);
FLATKNOT_ERROR(AmbiguousRealization);
FLATKNOT_ERROR(UnknownCrossing);
FLATKNOT_ERROR(UnknownArc);
FLATKNOT_ERROR(InvalidDiagram);
FLATKNOT_ERROR(TooManyCrossings);
FLATKNOT_ERROR(InadmissibleSite);
FLATKNOT_ERROR(NotVerifiedUnknot);
FLATKNOT_ERROR(StepCollapse);
FLATKNOT_ERROR(NotConverged);

#undef FLATKNOT_ERROR

}  // namespace flatknot
