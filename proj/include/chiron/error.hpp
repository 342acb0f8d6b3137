/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chiron {

enum class ErrorCode {
    InvalidInput,
    OverUtilized,
    SchemaError,
    DuplicateCi,
    InsufficientPoints,
    DuplicateX,
    ZeroVariance,
    Infeasible,
    OutOfDomain,
    InvalidFailureSpec,
    NotCaughtUp,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. `index()` carries the
/// offending row/run position when the error refers to one element of a sequence.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(message), code_(code), index_(index) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

/// No root of the availability curve lies inside the profiled domain.
class OutOfDomainError : public Error {
public:
    OutOfDomainError(const std::string& message, double nearest_root, double domain_lo, double domain_hi)
        : Error(ErrorCode::OutOfDomain, message), nearest_root_(nearest_root), lo_(domain_lo), hi_(domain_hi) {}

    [[nodiscard]] double nearest_root() const noexcept { return nearest_root_; }
    [[nodiscard]] double domain_lo() const noexcept { return lo_; }
    [[nodiscard]] double domain_hi() const noexcept { return hi_; }

private:
    double nearest_root_;
    double lo_;
    double hi_;
};

} // namespace chiron
