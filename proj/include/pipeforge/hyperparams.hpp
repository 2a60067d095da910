/*
 * Copyright 2026 The PipeForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIPEFORGE_HYPERPARAMS_HPP_
#define PIPEFORGE_HYPERPARAMS_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pipeforge/errors.hpp"
#include "pipeforge/random.hpp"

namespace pipeforge {

/// A concrete hyperparameter value.
using HyperValue = std::variant<std::int64_t, double, std::string>;

/// Explicitly-set hyperparameters of a node; keys absent here fall back to
/// the operation's declared defaults.
using ParamMap = std::map<std::string, HyperValue>;

inline std::string hyper_value_to_string(const HyperValue& v) {
  if (std::holds_alternative<std::int64_t>(v))
    return std::to_string(std::get<std::int64_t>(v));
  if (std::holds_alternative<double>(v)) {
    std::ostringstream os;
    os.precision(17);
    os << std::get<double>(v);
    return os.str();
  }
  return std::get<std::string>(v);
}

struct IntRange {
  std::int64_t low = 0;
  std::int64_t high = 0;
};

struct RealRange {
  double low = 0.0;
  double high = 0.0;
  bool log_scale = false;
};

struct CategoricalSet {
  std::vector<std::string> choices;
};

/// Domain of one hyperparameter dimension.
struct ParamDomain {
  std::variant<IntRange, RealRange, CategoricalSet> domain;
  HyperValue default_value;

  bool contains(const HyperValue& v) const {
    if (const auto* ir = std::get_if<IntRange>(&domain)) {
      if (!std::holds_alternative<std::int64_t>(v)) return false;
      const auto x = std::get<std::int64_t>(v);
      return x >= ir->low && x <= ir->high;
    }
    if (const auto* rr = std::get_if<RealRange>(&domain)) {
      double x;
      if (std::holds_alternative<double>(v))
        x = std::get<double>(v);
      else if (std::holds_alternative<std::int64_t>(v))
        x = static_cast<double>(std::get<std::int64_t>(v));
      else
        return false;
      return std::isfinite(x) && x >= rr->low && x <= rr->high;
    }
    const auto& cs = std::get<CategoricalSet>(domain);
    if (!std::holds_alternative<std::string>(v)) return false;
    const auto& s = std::get<std::string>(v);
    for (const auto& c : cs.choices)
      if (c == s) return true;
    return false;
  }

  /// Uniform draw from the domain; log-scaled real dimensions are sampled
  /// log-uniformly.
  HyperValue sample(Rng& rng) const {
    if (const auto* ir = std::get_if<IntRange>(&domain))
      return rng.next_int(ir->low, ir->high);
    if (const auto* rr = std::get_if<RealRange>(&domain)) {
      if (rr->log_scale) {
        const double lo = std::log10(rr->low);
        const double hi = std::log10(rr->high);
        return std::pow(10.0, rng.next_uniform(lo, hi));
      }
      return rng.next_uniform(rr->low, rr->high);
    }
    const auto& cs = std::get<CategoricalSet>(domain);
    return cs.choices[rng.next_index(cs.choices.size())];
  }

  /// Perturbs `base` locally: about one grid step for integers, ~10% of the
  /// (log-)range for reals, occasional re-draw for categoricals. The result
  /// always stays inside the domain.
  HyperValue perturb(const HyperValue& base, Rng& rng) const {
    if (const auto* ir = std::get_if<IntRange>(&domain)) {
      std::int64_t x = std::holds_alternative<std::int64_t>(base)
                           ? std::get<std::int64_t>(base)
                           : ir->low;
      x += rng.next_bool() ? 1 : -1;
      if (x < ir->low) x = ir->low;
      if (x > ir->high) x = ir->high;
      return x;
    }
    if (const auto* rr = std::get_if<RealRange>(&domain)) {
      double x = std::holds_alternative<double>(base) ? std::get<double>(base)
                                                      : rr->low;
      if (rr->log_scale) {
        const double lo = std::log10(rr->low), hi = std::log10(rr->high);
        double lx = std::log10(x) + rng.next_gaussian() * 0.1 * (hi - lo);
        if (lx < lo) lx = lo;
        if (lx > hi) lx = hi;
        return std::pow(10.0, lx);
      }
      x += rng.next_gaussian() * 0.1 * (rr->high - rr->low);
      if (x < rr->low) x = rr->low;
      if (x > rr->high) x = rr->high;
      return x;
    }
    if (rng.next_bool(0.7)) return base;
    return sample(rng);
  }
};

/// Named hyperparameter space of one operation. std::map keeps dimension
/// order deterministic and key-sorted everywhere (sampling, signatures,
/// serialization).
using ParamSpace = std::map<std::string, ParamDomain>;

/// Reads a parameter as double regardless of how it was stored.
inline double param_as_double(const ParamMap& params, const std::string& key,
                              double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (std::holds_alternative<double>(it->second))
    return std::get<double>(it->second);
  if (std::holds_alternative<std::int64_t>(it->second))
    return static_cast<double>(std::get<std::int64_t>(it->second));
  throw InvalidHyperparamError("parameter '" + key + "' is not numeric");
}

inline std::int64_t param_as_int(const ParamMap& params, const std::string& key,
                                 std::int64_t fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (std::holds_alternative<std::int64_t>(it->second))
    return std::get<std::int64_t>(it->second);
  if (std::holds_alternative<double>(it->second))
    return static_cast<std::int64_t>(std::llround(std::get<double>(it->second)));
  throw InvalidHyperparamError("parameter '" + key + "' is not numeric");
}

inline std::string param_as_string(const ParamMap& params,
                                   const std::string& key,
                                   const std::string& fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!std::holds_alternative<std::string>(it->second))
    throw InvalidHyperparamError("parameter '" + key + "' is not a string");
  return std::get<std::string>(it->second);
}

}  // namespace pipeforge

#endif  // PIPEFORGE_HYPERPARAMS_HPP_
