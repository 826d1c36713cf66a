#pragma once

#include <string>

namespace specphase {

/// %.17g, the float rendering shared by the CSV, JSON-adjacent and dump outputs.
std::string format_double(double v);

}  // namespace specphase
