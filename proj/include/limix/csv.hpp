#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "limix/errors.hpp"

namespace limix {

// Stable numeric formatting so reruns are byte-identical.
inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string fmt_num(int v) { return std::to_string(v); }

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : f_(path, std::ios::trunc) {
    if (!f_) throw MissingArtifactError("cannot open for write: " + path);
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) f_ << ',';
      f_ << cells[i];
    }
    f_ << '\n';
  }

 private:
  std::ofstream f_;
};

}  // namespace limix
