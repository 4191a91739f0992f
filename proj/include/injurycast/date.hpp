#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace injurycast {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(int days_since_epoch) : days_(days_since_epoch) {}

    /// Throws std::invalid_argument for a non-existent calendar date.
    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Strict ISO-8601 `YYYY-MM-DD`; nullopt when malformed or not a real date.
    static std::optional<Date> parse(std::string_view text);

    std::string iso() const;
    constexpr int days() const { return days_; }

    constexpr Date operator+(int n) const { return Date(days_ + n); }
    constexpr Date operator-(int n) const { return Date(days_ - n); }
    constexpr int operator-(Date other) const { return days_ - other.days_; }
    Date& operator+=(int n) {
        days_ += n;
        return *this;
    }

    friend constexpr auto operator<=>(Date, Date) = default;

private:
    int days_ = 0;
};

}  // namespace injurycast
