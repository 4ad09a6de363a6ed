#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace tdo {

// Proleptic Gregorian calendar date, canonical form "YYYY-MM-DD" with fixed
// zero-padded widths. Years 1..9999.
struct Date {
    int year = 1;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    bool valid() const;
    std::string to_string() const;

    // Strict: exactly "YYYY-MM-DD", digits only, value must be a real date.
    static std::optional<Date> parse(std::string_view text);
};

} // namespace tdo
