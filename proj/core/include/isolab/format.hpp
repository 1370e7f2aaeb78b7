#pragma once

#include <string>

namespace isolab {

/// Shortest decimal string that round-trips to the same double; always
/// uses '.' regardless of the global locale. Non-finite values print as
/// nan, inf, -inf.
std::string format_double(double v);

}  // namespace isolab
