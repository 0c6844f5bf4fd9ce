// Copyright 2026 The rlqc Authors
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

#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rlqc {

/// Whole file as bytes. IoError if unreadable.
std::string read_file(const std::filesystem::path &path);

/// Writes `path.tmp.<pid>` and renames it over `path`. IoError on failure.
void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

/// Creates the directory (and parents) if needed. IoError on failure.
void ensure_directory(const std::filesystem::path &dir);

/// %.17g, so values round-trip exactly.
std::string format_double(double v);

/// Minimal CSV writer that appends rows to a file as they arrive (logs survive a crash).
class CsvWriter {
   public:
    CsvWriter(const std::filesystem::path &path, const std::vector<std::string> &header);
    ~CsvWriter();
    CsvWriter(const CsvWriter &) = delete;
    CsvWriter &operator=(const CsvWriter &) = delete;

    void row(const std::vector<std::string> &cells);
    void flush();

   private:
    std::FILE *file_ = nullptr;
    std::filesystem::path path_;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace rlqc
