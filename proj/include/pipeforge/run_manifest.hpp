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

#ifndef PIPEFORGE_RUN_MANIFEST_HPP_
#define PIPEFORGE_RUN_MANIFEST_HPP_

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipeforge/errors.hpp"
#include "pipeforge/random.hpp"

namespace pipeforge {

/// Record of one CLI run: the exact flag vector plus input hashes, enough
/// to re-run the identical experiment. Timestamps are the only
/// non-reproducible fields.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;  // argv after the subcommand
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::string> input_hashes;  // path -> fnv1a-64 hex
  std::vector<std::string> outputs;                 // artifact paths
};

inline std::string iso_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline std::string hash_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

/// Written atomically (temp file + rename) at run end.
inline void write_manifest(const RunManifest& m,
                           const std::filesystem::path& dir) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["arguments"] = m.arguments;
  j["seed"] = m.seed;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["input_hashes"] = m.input_hashes;
  j["outputs"] = m.outputs;
  const auto tmp = dir / ".manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write manifest in '" + dir.string() + "'");
    out << j.dump(4) << "\n";
  }
  std::filesystem::rename(tmp, dir / "manifest.json");
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  in >> j;
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  for (const auto& a : j.at("arguments"))
    m.arguments.push_back(a.get<std::string>());
  m.seed = j.value("seed", 0ULL);
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  if (j.contains("input_hashes"))
    for (const auto& [k, v] : j["input_hashes"].items())
      m.input_hashes[k] = v.get<std::string>();
  if (j.contains("outputs"))
    for (const auto& o : j["outputs"]) m.outputs.push_back(o.get<std::string>());
  return m;
}

}  // namespace pipeforge

#endif  // PIPEFORGE_RUN_MANIFEST_HPP_
