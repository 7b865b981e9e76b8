#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kamforge {

/// A small divisor fell below the Diophantine floor.
struct DcFailure : std::runtime_error {
  std::vector<int> k;
  int l = 0;
  double divisor = 0.0;
  double floor = 0.0;
  DcFailure(const std::string& what, std::vector<int> k_, int l_, double div, double fl)
      : std::runtime_error(what), k(std::move(k_)), l(l_), divisor(div), floor(fl) {}
};

/// An implicit change of variables could not be inverted, or left its domain.
struct ContractionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A trajectory escaped or the iteration diverged.
struct EscapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace kamforge
