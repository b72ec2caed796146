/*
Copyright 2026 The mttkrp-lab Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mttkrp {

using Real = double;
using Index = std::int64_t;

/// Word and operation counter. Parameter sweeps reach I*R*N ~ 2^64, so
/// counters are 128-bit.
using Count = __int128;

inline std::string to_string(Count value) {
    if (value == 0) {
        return "0";
    }
    const bool negative = value < 0;
    unsigned __int128 magnitude = negative ? static_cast<unsigned __int128>(-(value + 1)) + 1u
                                           : static_cast<unsigned __int128>(value);
    std::string digits;
    while (magnitude != 0) {
        digits.push_back(static_cast<char>('0' + static_cast<int>(magnitude % 10)));
        magnitude /= 10;
    }
    if (negative) {
        digits.push_back('-');
    }
    std::reverse(digits.begin(), digits.end());
    return digits;
}

inline Count ceil_div(Count numerator, Count denominator) {
    return (numerator + denominator - 1) / denominator;
}

inline Count product(std::span<const Index> values) {
    Count result = 1;
    for (Index v : values) {
        result *= v;
    }
    return result;
}

/// Base of every error raised by the library. The CLI maps subclasses to
/// exit codes, so new subclasses must derive from one of the two families.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied something malformed (dimensions, formats, parameters).
class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// Inputs are well formed but the requested machine or plan cannot run them.
class Infeasible : public Error {
  public:
    using Error::Error;
};

class InvalidProblem : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class ShapeError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class DomainError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class DistributionError : public InvalidInput {
  public:
    using InvalidInput::InvalidInput;
};

class InfeasibleMachine : public Infeasible {
  public:
    using Infeasible::Infeasible;
};

class InfeasibleBlock : public Infeasible {
  public:
    using Infeasible::Infeasible;
};

class PlanningError : public Infeasible {
  public:
    using Infeasible::Infeasible;
};

/// An algorithm issued traffic the memory model forbids. Always a bug in the
/// instruction stream, never a user error.
class CapacityViolation : public Error {
  public:
    using Error::Error;
};

class SimulatorBug : public Error {
  public:
    using Error::Error;
};

inline std::string join_dims(std::span<const Index> dims, char sep = 'x') {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i != 0) {
            out.push_back(sep);
        }
        out += std::to_string(dims[i]);
    }
    return out;
}

}  // namespace mttkrp
