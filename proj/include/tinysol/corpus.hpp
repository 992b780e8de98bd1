#pragma once

#include <filesystem>

#include "tinysol/json_io.hpp"

namespace tinysol {

/// Runs every fixture in `dir` against `dir/expectations.json` and returns a
/// corpus report (schema tinysol.corpus/1). Throws ConfigError when the
/// directory holds no fixtures or the expectations name a missing fixture
/// (MissingFixture).
Json run_corpus(const std::filesystem::path& dir);

/// Reads a whole file; throws ConfigError when it cannot be opened.
std::string read_file(const std::filesystem::path& p);

}  // namespace tinysol
