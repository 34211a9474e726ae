#ifndef TRUNCSCORE_ERRORS_HPP
#define TRUNCSCORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace truncscore {

// All library failures are thrown as typed exceptions so callers can tell a
// data problem (bad CSV row, empty arm) from a numerical one (singular matrix,
// bracket failure) without parsing messages.

struct NotPositiveDefinite : std::runtime_error {
    explicit NotPositiveDefinite(const std::string& m) : std::runtime_error(m) {}
};

struct RankDeficient : std::runtime_error {
    explicit RankDeficient(const std::string& m) : std::runtime_error(m) {}
};

struct BracketError : std::runtime_error {
    explicit BracketError(const std::string& m) : std::runtime_error(m) {}
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& m) : std::runtime_error(m) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& m) : std::runtime_error(m) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& m) : std::runtime_error(m) {}
};

struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& m) : std::runtime_error(m) {}
};

struct Separation : std::runtime_error {
    explicit Separation(const std::string& m) : std::runtime_error(m) {}
};

struct NoEvents : std::runtime_error {
    explicit NoEvents(const std::string& m) : std::runtime_error(m) {}
};

struct SingularInformation : std::runtime_error {
    explicit SingularInformation(const std::string& m) : std::runtime_error(m) {}
};

struct EmptyArm : std::runtime_error {
    explicit EmptyArm(const std::string& m) : std::runtime_error(m) {}
};

struct PositivityViolation : std::runtime_error {
    explicit PositivityViolation(const std::string& m) : std::runtime_error(m) {}
};

struct CensoringPositivityViolation : std::runtime_error {
    explicit CensoringPositivityViolation(const std::string& m) : std::runtime_error(m) {}
};

struct DegenerateCovariance : std::runtime_error {
    explicit DegenerateCovariance(const std::string& m) : std::runtime_error(m) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace truncscore

#endif
