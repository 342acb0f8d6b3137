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

#include "chiron/error.hpp"

namespace chiron {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidInput:
        return "InvalidInput";
    case ErrorCode::OverUtilized:
        return "OverUtilized";
    case ErrorCode::SchemaError:
        return "SchemaError";
    case ErrorCode::DuplicateCi:
        return "DuplicateCi";
    case ErrorCode::InsufficientPoints:
        return "InsufficientPoints";
    case ErrorCode::DuplicateX:
        return "DuplicateX";
    case ErrorCode::ZeroVariance:
        return "ZeroVariance";
    case ErrorCode::Infeasible:
        return "Infeasible";
    case ErrorCode::OutOfDomain:
        return "OutOfDomain";
    case ErrorCode::InvalidFailureSpec:
        return "InvalidFailureSpec";
    case ErrorCode::NotCaughtUp:
        return "NotCaughtUp";
    }
    return "Unknown";
}

} // namespace chiron
