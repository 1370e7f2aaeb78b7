#include "isolab/params.hpp"

#include <cmath>
#include <sstream>

#include "isolab/errors.hpp"

namespace isolab {

void require_p_in_range(double p) {
  if (!(p >= 1.0 && p <= 2.0)) {
    std::ostringstream msg;
    msg << "p must lie in [1, 2], got " << p;
    throw DomainError(msg.str());
  }
}

void PBallParams::validate() const {
  require_p_in_range(p);
  if (n < 1) {
    std::ostringstream msg;
    msg << "dimension n must be >= 1, got " << n;
    throw DomainError(msg.str());
  }
}

std::string PBallParams::describe() const {
  std::ostringstream out;
  out << "B_" << p << "^" << n;
  return out.str();
}

}  // namespace isolab
