#pragma once

#include <stdexcept>
#include <string>

namespace dflab {

// Error categories mirror the status codes of the C API (see include/dflab/dflab.h).
enum class ErrorCode {
    invalid_argument = 1,  // bad parameter value
    domain_error     = 2,  // input outside the mathematical domain
    precondition     = 3,  // operation precondition violated
    numeric          = 4,  // internal numeric consistency failure (bug sentinel)
    unsupported      = 5,  // feature not available for this input kind
    parse            = 6,  // malformed JSON / config schema violation
    check_failed     = 7,  // configured tolerance not met
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& msg) {
    throw Error(ErrorCode::invalid_argument, msg);
}
[[noreturn]] inline void throw_domain(const std::string& msg) {
    throw Error(ErrorCode::domain_error, msg);
}
[[noreturn]] inline void throw_precondition(const std::string& msg) {
    throw Error(ErrorCode::precondition, msg);
}
[[noreturn]] inline void throw_numeric(const std::string& msg) {
    throw Error(ErrorCode::numeric, msg);
}
[[noreturn]] inline void throw_unsupported(const std::string& msg) {
    throw Error(ErrorCode::unsupported, msg);
}
[[noreturn]] inline void throw_parse(const std::string& msg) {
    throw Error(ErrorCode::parse, msg);
}

}  // namespace dflab
