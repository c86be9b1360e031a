#pragma once
// Deterministic CSV output: header row, fixed column order, %.12g values.

#include <string>
#include <vector>

namespace fifotap {

// %.12g rendering; negative zero is normalized so re-runs stay byte-identical.
std::string csv_value(double x);

// Writes header and rows with '\n' line endings. Throws io_error on failure.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace fifotap
