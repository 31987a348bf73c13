#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rpnc {

using Complex = std::complex<double>;

/// Transmitter identity in the two-way relay network.
enum class Role : std::uint8_t { EndNodeA, EndNodeB, Relay };

constexpr std::string_view to_string(Role role) {
  switch (role) {
    case Role::EndNodeA: return "A";
    case Role::EndNodeB: return "B";
    case Role::Relay: return "R";
  }
  return "?";
}

constexpr Role other_end(Role role) {
  return role == Role::EndNodeA ? Role::EndNodeB : Role::EndNodeA;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RPNC_DEFINE_ERROR(Name)              \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

RPNC_DEFINE_ERROR(ParameterError);
RPNC_DEFINE_ERROR(RangeError);
RPNC_DEFINE_ERROR(SequencingError);
RPNC_DEFINE_ERROR(FormatError);
RPNC_DEFINE_ERROR(EstimationError);
RPNC_DEFINE_ERROR(DemapError);
RPNC_DEFINE_ERROR(MeasurementError);
RPNC_DEFINE_ERROR(ConfigError);

#undef RPNC_DEFINE_ERROR

}  // namespace rpnc
