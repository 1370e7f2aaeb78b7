#pragma once

#include <string>

namespace isolab {

/// The pair (p, n): exponent of the l_p ball and ambient dimension.
struct PBallParams {
  double p = 2.0;
  int n = 1;

  /// Throws DomainError unless 1 <= p <= 2 and n >= 1.
  void validate() const;

  /// Exponent (2 - p) / (2p) governing the Euclidean radius scale n^{-(2-p)/(2p)}.
  double radius_exponent() const { return (2.0 - p) / (2.0 * p); }

  std::string describe() const;
};

/// Throws DomainError unless 1 <= p <= 2.
void require_p_in_range(double p);

}  // namespace isolab
