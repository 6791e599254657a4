#include "pcfgeo/format.hpp"

#include <cstdio>
#include <fstream>

#include "pcfgeo/error.hpp"

namespace pcfgeo {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0 into 0
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::resource, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::resource, "failed writing " + path);
}

}  // namespace pcfgeo
