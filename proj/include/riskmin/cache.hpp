#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace riskmin {

// Columnar stage cache: named double columns in a flat binary file, keyed by
// the configuration hash.  A reader that finds anything unexpected (magic,
// version, hash, truncation) reports a miss; the caller recomputes.
using ColumnMap = std::map<std::string, std::vector<double>>;

// Writes atomically (temp file + rename).  Returns false on any I/O failure;
// caching is best-effort and never fails a run.
bool write_columns(const std::string& path, std::uint64_t config_hash, const ColumnMap& columns);

// Returns true and fills `out` only on a complete, hash-matching file.
bool read_columns(const std::string& path, std::uint64_t config_hash, ColumnMap& out);

}  // namespace riskmin
