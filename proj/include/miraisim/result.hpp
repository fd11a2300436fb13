// Minimal value-or-error type used across the simulator's module boundaries.

#pragma once

#include <cassert>
#include <optional>
#include <utility>
#include <variant>

namespace miraisim {

template <typename T, typename E>
class Result {
public:
    Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

    bool ok() const { return v_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() {
        assert(ok());
        return std::get<0>(v_);
    }
    const T& value() const {
        assert(ok());
        return std::get<0>(v_);
    }
    const E& error() const {
        assert(!ok());
        return std::get<1>(v_);
    }

    T value_or(T fallback) const { return ok() ? std::get<0>(v_) : std::move(fallback); }

private:
    std::variant<T, E> v_;
};

/// Result for operations with no payload on success.
template <typename E>
class Status {
public:
    Status() = default;
    Status(E error) : err_(std::in_place, std::move(error)) {}

    bool ok() const { return !err_.has_value(); }
    explicit operator bool() const { return ok(); }
    const E& error() const {
        assert(!ok());
        return *err_;
    }

private:
    std::optional<E> err_;
};

}  // namespace miraisim
