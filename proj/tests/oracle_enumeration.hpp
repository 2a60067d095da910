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

// Test-only brute-force oracle: exhaustively enumerates every valid
// pipeline of up to three nodes over a fixed operation set (default
// hyperparameters). Independent of the composer's search machinery; used
// to pin the optimum the search has to reach.

#ifndef PIPEFORGE_TESTS_ORACLE_ENUMERATION_HPP_
#define PIPEFORGE_TESTS_ORACLE_ENUMERATION_HPP_

#include <set>
#include <string>
#include <vector>

#include "pipeforge/pipeline.hpp"

namespace pipeforge::testing {

/// All structurally distinct pipelines with <= 3 nodes over `ops`:
/// singles, two-node chains, three-node chains, two-parent joins and the
/// shared-root triangle. Deduplicated by canonical signature and filtered
/// through validate().
inline std::vector<Pipeline> enumerate_pipelines_up_to_3(
    const std::vector<std::string>& ops, const Registry& registry,
    TaskType task, StructureClass structure_class = StructureClass::composite,
    int max_depth = 3) {
  std::vector<Pipeline> raw;

  auto n = [](int id, const std::string& op, std::vector<int> parents) {
    Node out;
    out.id = id;
    out.operation_id = op;
    out.parent_ids = std::move(parents);
    return out;
  };

  for (const auto& a : ops) raw.push_back(make_pipeline({n(0, a, {})}));

  for (const auto& a : ops)
    for (const auto& b : ops)
      raw.push_back(make_pipeline({n(0, a, {}), n(1, b, {0})}));

  for (const auto& a : ops)
    for (const auto& b : ops)
      for (const auto& c : ops) {
        // Chain a -> b -> c.
        raw.push_back(
            make_pipeline({n(0, a, {}), n(1, b, {0}), n(2, c, {1})}));
        // Join {a, b} -> c.
        raw.push_back(
            make_pipeline({n(0, a, {}), n(1, b, {}), n(2, c, {0, 1})}));
        // Triangle: a feeds b and c, b feeds c.
        raw.push_back(
            make_pipeline({n(0, a, {}), n(1, b, {0}), n(2, c, {0, 1})}));
      }

  std::vector<Pipeline> out;
  std::set<std::string> seen;
  for (auto& p : raw) {
    if (!validate(p, structure_class, max_depth, registry, task).ok) continue;
    const auto sig = canonical_signature(p);
    if (seen.insert(sig).second) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace pipeforge::testing

#endif  // PIPEFORGE_TESTS_ORACLE_ENUMERATION_HPP_
