#pragma once

#include <cstdint>
#include <stdexcept>

namespace lodegp {

// Error taxonomy mirrors the CLI exit-code contract:
// validation 1, inadmissible 2, numerical 3.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct inadmissible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 20240;

}  // namespace lodegp
