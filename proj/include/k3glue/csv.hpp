#pragma once

/// CSV emission with a fixed float format (17 significant digits) so that
/// repeated runs produce byte-identical files.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace k3glue {

inline std::string csv_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path), ncols_(columns.size())
    {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    bool good() const { return out_.good(); }
    std::size_t columns() const { return ncols_; }

private:
    std::ofstream out_;
    std::size_t ncols_;
};

} // namespace k3glue
