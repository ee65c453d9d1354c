// Copyright 2026 The imthresh Authors.
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

#ifndef IMTHRESH_TEXT_FORMAT_HPP_
#define IMTHRESH_TEXT_FORMAT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace imthresh {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

// Minimal RFC 4180 CSV. Fields containing ',', '"' or newlines are quoted.
std::string csv_row(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Parses CSV and checks the header row matches `expected_header` exactly.
// Returns the data rows, each verified to have the header's width.
std::vector<std::vector<std::string>> parse_csv_table(
    std::string_view text, const std::vector<std::string>& expected_header);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace imthresh

#endif  // IMTHRESH_TEXT_FORMAT_HPP_
