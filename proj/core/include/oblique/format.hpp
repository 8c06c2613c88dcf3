#pragma once

#include <string>

namespace oblique {

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite values.
std::string fmt_num(double v);

}  // namespace oblique
