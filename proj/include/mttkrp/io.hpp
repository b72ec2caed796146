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

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mttkrp/tensor.hpp"

namespace mttkrp {

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr const char* kSyntheticPrefix = "synthetic:";

struct SyntheticSpec {
    std::vector<Index> dims;
    Index rank = 0;
    std::uint64_t seed = kDefaultSeed;
};

namespace detail {

inline Index parse_index(const std::string& tok, const std::string& context) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used);
        if (used != tok.size()) {
            throw std::invalid_argument(tok);
        }
        return v;
    } catch (const std::logic_error&) {
        throw InvalidInput("expected an integer in " + context + ", got '" + tok + "'");
    }
}

}  // namespace detail

/// Parses `d1,d2,...,dN:R[@seed]`, with or without the `synthetic:` prefix.
inline SyntheticSpec parse_synthetic(std::string text) {
    if (text.rfind(kSyntheticPrefix, 0) == 0) {
        text = text.substr(std::string(kSyntheticPrefix).size());
    }
    const std::string context = "synthetic spec '" + text + "'";
    const std::size_t colon = text.find(':');
    if (colon == std::string::npos) {
        throw InvalidInput(context + " is missing ':R'");
    }
    SyntheticSpec spec;
    std::string dims = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    const std::size_t at = rest.find('@');
    if (at != std::string::npos) {
        const std::string seed = rest.substr(at + 1);
        try {
            std::size_t used = 0;
            spec.seed = std::stoull(seed, &used);
            if (used != seed.size()) {
                throw std::invalid_argument(seed);
            }
        } catch (const std::logic_error&) {
            throw InvalidInput("bad seed in " + context);
        }
        rest = rest.substr(0, at);
    }
    spec.rank = detail::parse_index(rest, context);
    std::stringstream ss(dims);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        spec.dims.push_back(detail::parse_index(tok, context));
    }
    return spec;
}

inline MttkrpProblem make_problem(const SyntheticSpec& spec, std::size_t mode) {
    return make_synthetic_problem({spec.dims, spec.rank, mode}, spec.seed);
}

/// Text format: header `N I_1 ... I_N R n` (n is 1-based), then the I
/// tensor values in column-major order, then each input factor row-major in
/// increasing mode order.
inline MttkrpProblem read_problem(std::istream& in) {
    std::size_t order = 0;
    if (!(in >> order) || order < 2) {
        throw InvalidProblem("tensor file header must start with N >= 2");
    }
    std::vector<Index> dims(order);
    for (Index& d : dims) {
        if (!(in >> d)) {
            throw InvalidProblem("tensor file header is truncated");
        }
    }
    Index rank = 0;
    std::size_t mode = 0;
    if (!(in >> rank >> mode) || mode < 1) {
        throw InvalidProblem("tensor file header needs R and a 1-based mode n");
    }
    const MttkrpShape shape{dims, rank, mode - 1};
    shape.validate();
    auto read_values = [&](std::vector<Real>& values, const std::string& what) {
        for (Real& v : values) {
            if (!(in >> v)) {
                throw InvalidProblem("tensor file ends inside " + what);
            }
        }
    };
    std::vector<Real> xv(static_cast<std::size_t>(shape.tensor_size()));
    read_values(xv, "the tensor values");
    std::vector<FactorMatrix> factors;
    for (std::size_t k = 0; k < order; ++k) {
        if (k == shape.mode) {
            continue;
        }
        std::vector<Real> av(static_cast<std::size_t>(dims[k] * rank));
        read_values(av, "factor " + std::to_string(k + 1));
        factors.emplace_back(dims[k], rank, std::move(av));
    }
    std::string trailing;
    if (in >> trailing) {
        throw InvalidProblem("unexpected trailing data in tensor file: '" + trailing + "'");
    }
    return MttkrpProblem(DenseTensor(dims, std::move(xv)), std::move(factors), shape.mode, rank);
}

inline void write_problem(std::ostream& out, const MttkrpProblem& problem) {
    out << problem.order();
    for (Index d : problem.tensor().dims()) {
        out << ' ' << d;
    }
    out << ' ' << problem.rank() << ' ' << problem.mode() + 1 << '\n';
    out << std::setprecision(17);
    for (Real v : problem.tensor().values()) {
        out << v << '\n';
    }
    for (const FactorMatrix& a : problem.factors()) {
        for (Real v : a.values()) {
            out << v << '\n';
        }
    }
}

/// A problem from a path or a `synthetic:` spec. `mode` (0-based) applies
/// to synthetic specs only; files carry their own.
inline MttkrpProblem load_problem(const std::string& source, std::size_t mode) {
    if (source.rfind(kSyntheticPrefix, 0) == 0) {
        return make_problem(parse_synthetic(source), mode);
    }
    std::ifstream in(source);
    if (!in) {
        throw InvalidInput("cannot open tensor file '" + source + "'");
    }
    return read_problem(in);
}

/// `key=value` lines; blank lines and `#` comments are skipped. Keys are
/// flag names without leading dashes.
inline std::map<std::string, std::string> read_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(lineno) + " is not key=value: '" + line + "'");
        }
        std::string key = trim(line.substr(0, eq));
        while (!key.empty() && key.front() == '-') {
            key.erase(key.begin());
        }
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

}  // namespace mttkrp
