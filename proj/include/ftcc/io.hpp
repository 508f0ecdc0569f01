// Copyright 2026 The ftcc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small file helpers shared by the loaders and writers.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ftcc {

// Whole file as bytes; IoError when unreadable.
std::string read_file(const std::filesystem::path& path);
// Replaces the file; IoError when unwritable. Parent directories must exist.
void write_file(const std::filesystem::path& path, std::string_view content);

using JsonLineFn = std::function<void(const nlohmann::json&, std::size_t line)>;

// Calls fn for each non-blank line parsed as JSON. Malformed lines throw
// ParseError naming the 1-based line number.
void for_each_json_line(std::string_view content, const std::string& source, const JsonLineFn& fn);
void for_each_json_line(const std::filesystem::path& path, const JsonLineFn& fn);

}  // namespace ftcc
