#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace meterhub {

/// Value-or-error-reason result. Errors are data here (decode failures,
/// budget rejections), so the reason is a plain string that callers can
/// forward to dead-letter records or CLI diagnostics.
struct Failure {
    std::string reason;
};

inline Failure fail(std::string reason) { return Failure{std::move(reason)}; }

template <typename T>
class Expected {
public:
    Expected(T value) : v_(std::move(value)) {}
    Expected(Failure f) : v_(std::move(f)) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        assert(ok());
        return std::get<T>(v_);
    }
    T& value() & {
        assert(ok());
        return std::get<T>(v_);
    }
    T take() {
        assert(ok());
        return std::move(std::get<T>(v_));
    }

    const std::string& error() const {
        assert(!ok());
        return std::get<Failure>(v_).reason;
    }

private:
    std::variant<T, Failure> v_;
};

/// Success-or-reason for operations without a result value.
template <>
class Expected<void> {
public:
    Expected() = default;
    Expected(Failure f) : error_(std::move(f.reason)), failed_(true) {}

    bool ok() const { return !failed_; }
    explicit operator bool() const { return ok(); }

    const std::string& error() const {
        assert(failed_);
        return error_;
    }

private:
    std::string error_;
    bool failed_ = false;
};

}  // namespace meterhub
