#include "fspec/csv.hpp"

#include "fspec/common.hpp"

#include <charconv>
#include <fstream>

namespace fspec::csv {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_provenance(const std::string& path, const std::map<std::string, std::string>& entries) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    for (const auto& [k, v] : entries) out << k << '=' << v << '\n';
}

}  // namespace fspec::csv
