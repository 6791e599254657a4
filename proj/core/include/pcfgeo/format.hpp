#pragma once

#include <string>

namespace pcfgeo {

// Shortest round-trip text is not guaranteed stable across libraries, so
// every numeric output uses a fixed 17-significant-digit format.
std::string format_double(double value);

// Writes text to path, throwing Error(resource) on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pcfgeo
