#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hfsim {

// Shortest decimal string that round-trips the exact double value.
// Used for every number we print so output is byte-stable across
// runs, platforms and thread counts.
std::string format_double(double v);

std::string csv_row(const std::vector<std::string>& fields);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace hfsim
