#pragma once

#include <string>
#include <vector>

namespace hjbd {

inline constexpr const char* kSchemaLine = "# hjbd-schema v1";

/// Shortest text that round-trips the double exactly.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Data rows of a CSV file, skipping '#' comments and the header line.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hjbd
