#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace toolgap {

// Exact rational arithmetic for accuracy bookkeeping. Keeping accuracies as
// correct/total counts makes the additive gap identity hold exactly and lets
// table rendering use integer half-up rounding instead of double formatting.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ == 0) throw std::invalid_argument("rational: zero denominator");
        normalize();
    }

    static Rational from_int(std::int64_t v) { return Rational(v, 1); }

    // Parses a plain decimal like "-54.20" exactly.
    static Rational from_decimal(const std::string& text);

    // correct/total expressed as a percentage.
    static Rational percent(std::int64_t correct, std::int64_t total) {
        if (total <= 0) throw std::invalid_argument("rational: nonpositive total");
        return Rational(100 * correct, total);
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    bool is_zero() const { return num_ == 0; }

    // Fixed-point rendering with half-up rounding, e.g. to_fixed(2) -> "-54.20".
    std::string to_fixed(int decimals) const;

    Rational operator-() const { return Rational(-num_, den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        const std::int64_t g = std::gcd(a.den_, b.den_);
        const std::int64_t lhs = a.num_ * (b.den_ / g);
        const std::int64_t rhs = b.num_ * (a.den_ / g);
        return Rational(lhs + rhs, a.den_ / g * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        const std::int64_t g1 = std::gcd(std::abs(a.num_), b.den_);
        const std::int64_t g2 = std::gcd(std::abs(b.num_), a.den_);
        return Rational((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational: division by zero");
        return a * Rational(b.den_, b.num_);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(std::abs(num_), den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_;
    std::int64_t den_;
};

}  // namespace toolgap
