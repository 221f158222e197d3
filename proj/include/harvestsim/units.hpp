#pragma once

namespace harvestsim {

// A year is 365 days throughout; leap days are ignored.
inline constexpr double kYearSeconds = 365.0 * 86400.0;
inline constexpr double kWeeksPerYear = 52.0;
inline constexpr double kDaySeconds = 86400.0;
inline constexpr double kCelsiusOffset = 273.15;

}  // namespace harvestsim
