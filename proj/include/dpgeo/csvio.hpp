#pragma once

#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgeo {

/// Minimal CSV writer: header + rows of doubles, full precision.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns)
        : out_(path), ncols_(columns.size()) {
        if (!out_) throw std::runtime_error("cannot open " + path);
        out_ << std::setprecision(17);
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<double>& values) {
        if (values.size() != ncols_) throw std::invalid_argument("CsvWriter: column mismatch");
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << values[i] << (i + 1 < values.size() ? "," : "\n");
    }

  private:
    std::ofstream out_;
    std::size_t ncols_;
};

}  // namespace dpgeo
