// Copyright 2026 The Shaping Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shaping/checkpoint.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace shaping {

nlohmann::json ParamVectorToJson(const ParamVector& pv) {
  nlohmann::json slices = nlohmann::json::array();
  for (const ParamSlice& s : pv.layout.slices()) {
    slices.push_back({{"name", s.name},
                      {"offset", s.offset},
                      {"rows", s.rows},
                      {"cols", s.cols}});
  }
  return {{"format", kParamFormat}, {"layout", slices}, {"values", pv.values}};
}

ParamVector ParamVectorFromJson(const nlohmann::json& j) {
  if (!j.contains("format") || j.at("format") != kParamFormat) {
    throw std::runtime_error(
        "checkpoint: unsupported parameter format '" +
        (j.contains("format") ? j.at("format").dump() : std::string("<none>")) +
        "', expected '" + std::string(kParamFormat) + "'");
  }
  ParamVector pv;
  for (const auto& s : j.at("layout")) {
    const std::size_t cols = s.at("cols").get<std::size_t>();
    if (cols == 0) {
      pv.layout.AddVector(s.at("name"), s.at("rows").get<std::size_t>());
    } else {
      pv.layout.AddMatrix(s.at("name"), s.at("rows").get<std::size_t>(), cols);
    }
    if (pv.layout.slices().back().offset != s.at("offset").get<std::size_t>()) {
      throw std::runtime_error("checkpoint: layout offsets are not contiguous");
    }
  }
  pv.values = j.at("values").get<std::vector<double>>();
  if (pv.values.size() != pv.layout.size()) {
    throw std::runtime_error("checkpoint: value count does not match layout");
  }
  return pv;
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j) {
  WriteTextFile(path, j.dump(1) + "\n");
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace shaping
