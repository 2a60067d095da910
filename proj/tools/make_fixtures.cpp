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

// Regenerates the committed fixture CSVs and the default registry JSON.
// Usage: make_fixtures <repo-root>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "pipeforge/fixtures.hpp"
#include "pipeforge/operations.hpp"
#include "pipeforge/serde.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace pipeforge;

  const fs::path root = argc > 1 ? argv[1] : ".";
  const fs::path fixtures_dir = root / "data" / "fixtures";
  fs::create_directories(fixtures_dir);

  auto dump = [&](const fixtures::NamedDataset& item) {
    write_dataset_csv(item.data, fixtures_dir / (item.name + ".csv"));
    std::cout << "wrote " << (fixtures_dir / (item.name + ".csv")).string()
              << "\n";
  };
  for (const auto& item : fixtures::regression_suite()) dump(item);
  for (const auto& item : fixtures::classification_suite()) dump(item);
  for (const auto& item : fixtures::timeseries_suite()) dump(item);

  const fs::path registry_path = root / "data" / "registry.json";
  std::ofstream out(registry_path);
  out << registry_to_json(default_registry()).dump(4) << "\n";
  std::cout << "wrote " << registry_path.string() << "\n";
  return 0;
}
