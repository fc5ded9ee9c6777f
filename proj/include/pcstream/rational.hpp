#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pcstream {

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Exact rational over int64 with overflow-checked arithmetic.
/// Always normalized: gcd(num, den) == 1 and den > 0.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    std::int64_t floor() const;
    std::int64_t ceil() const;
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational operator-() const { return Rational(checked_neg(num_), den_); }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    static std::int64_t checked_mul(std::int64_t a, std::int64_t b);
    static std::int64_t checked_add(std::int64_t a, std::int64_t b);
    static std::int64_t checked_neg(std::int64_t a);

private:
    void normalize();

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Least common multiple with overflow check.
std::int64_t checked_lcm(std::int64_t a, std::int64_t b);

}  // namespace pcstream
