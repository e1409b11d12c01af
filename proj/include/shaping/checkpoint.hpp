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

#ifndef SHAPING_CHECKPOINT_HPP_
#define SHAPING_CHECKPOINT_HPP_

#include <filesystem>
#include <string_view>

#include "json.hpp"
#include "shaping/params.hpp"

namespace shaping {

inline constexpr std::string_view kParamFormat = "shaping.params.v1";

nlohmann::json ParamVectorToJson(const ParamVector& pv);
// Throws std::runtime_error on a missing or different format tag.
ParamVector ParamVectorFromJson(const nlohmann::json& j);

// Both writers replace `path` atomically (temp file + rename) and create
// missing parent directories.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

}  // namespace shaping

#endif  // SHAPING_CHECKPOINT_HPP_
