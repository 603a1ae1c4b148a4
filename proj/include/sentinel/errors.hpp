#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

/// Error categories, aligned with the CLI exit codes (usage=1, data=2, internal=3).
enum class ErrorKind { Usage = 1, Data = 2, Internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_internal(const std::string& msg) { throw Error(ErrorKind::Internal, msg); }

inline void require_data(bool cond, const std::string& msg) {
    if (!cond) throw_data(msg);
}

inline void require_usage(bool cond, const std::string& msg) {
    if (!cond) throw_usage(msg);
}

inline void require_internal(bool cond, const std::string& msg) {
    if (!cond) throw_internal(msg);
}

} // namespace sentinel
