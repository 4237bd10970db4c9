#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gg {

/// Base of every error raised by the library. kind() is the short name used in reports.
class GeomError : public std::runtime_error {
public:
    GeomError(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define GG_DEFINE_ERROR(Name)                                                    \
    struct Name : GeomError {                                                    \
        explicit Name(const std::string& msg) : GeomError(#Name, msg) {}        \
    };

GG_DEFINE_ERROR(InvalidPoint)
GG_DEFINE_ERROR(EvalError)
GG_DEFINE_ERROR(UnknownIdentifier)
GG_DEFINE_ERROR(NotSignedSymmetric)
GG_DEFINE_ERROR(PreconditionFailed)
GG_DEFINE_ERROR(KindMismatch)
GG_DEFINE_ERROR(NotProduct)
GG_DEFINE_ERROR(NotComplexStructure)
GG_DEFINE_ERROR(NotAnticommuting)
GG_DEFINE_ERROR(NotQuaternionic)
GG_DEFINE_ERROR(ResidualImaginary)
GG_DEFINE_ERROR(AdmissibilityFailed)
GG_DEFINE_ERROR(ParseError)
GG_DEFINE_ERROR(UnknownReference)
GG_DEFINE_ERROR(DimensionError)

#undef GG_DEFINE_ERROR

struct SyntaxError : GeomError {
    SyntaxError(const std::string& msg, std::size_t pos)
        : GeomError("SyntaxError", msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

struct SingularMetric : GeomError {
    SingularMetric(std::vector<double> x, double det);
    std::vector<double> point;
    double det;
};

} // namespace gg
