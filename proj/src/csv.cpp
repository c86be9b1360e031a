#include "fifotap/csv.hpp"

#include <cstdio>
#include <fstream>

#include "fifotap/errors.hpp"

namespace fifotap {

std::string csv_value(double x) {
    if (x == 0.0) x = 0.0;  // drops the sign of -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    out.close();
    if (!out.good()) throw io_error("failed writing " + path);
}

}  // namespace fifotap
