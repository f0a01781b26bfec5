#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace consensusflow {

// Shortest round-trip decimal form of v (std::to_chars), locale-independent.
// Infinities and NaN render as "inf", "-inf", "nan".
std::string format_double(double v);

// RFC-4180-style quoting: the cell is wrapped in double quotes (with inner
// quotes doubled) only when it contains a comma, quote, or newline.
std::string csv_escape(const std::string& cell);

// One CSV row, cells escaped as needed, terminated by '\n'.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace consensusflow
