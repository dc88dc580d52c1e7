#pragma once

#include <map>
#include <string>

namespace fspec::csv {

/// Shortest round-trip decimal form; identical inputs give identical bytes.
std::string num(double v);

/// Flat key=value provenance sidecar, keys sorted.
void write_provenance(const std::string& path, const std::map<std::string, std::string>& entries);

}  // namespace fspec::csv
