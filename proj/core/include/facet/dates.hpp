#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace facet {

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Civil-calendar conversions (proleptic Gregorian, UTC).  Days are counted
// from 1970-01-01.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);
void civil_from_days(std::int64_t days, int& year, unsigned& month, unsigned& day);

std::string iso_date(std::int64_t days);           // "YYYY-MM-DD"
std::int64_t parse_iso_date(std::string_view text); // throws ValidationError

inline std::int64_t day_of_timestamp(std::int64_t ts) {
    // Floor division so pre-epoch timestamps land on the correct day.
    return ts >= 0 ? ts / kSecondsPerDay : (ts - kSecondsPerDay + 1) / kSecondsPerDay;
}

} // namespace facet
