// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace apirec {

/// Writes `bytes` to `<path>.tmp` and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Whole file as bytes. Throws ConfigError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace apirec
