#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace seiqr {

/// Calendar day. All model time is measured in days from a reference date.
using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws std::invalid_argument.
Date parse_date(std::string_view text);

std::string format_date(Date d);

/// Whole days from `origin` to `d` (negative when d precedes origin).
inline int days_between(Date origin, Date d) { return (d - origin).count(); }

inline Date add_days(Date d, int n) { return d + std::chrono::days{n}; }

}  // namespace seiqr
