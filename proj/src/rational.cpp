#include "toolgap/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace toolgap {

Rational Rational::from_decimal(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    }
    if (s.empty()) throw std::invalid_argument("rational: empty decimal");
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = (s[0] == '-');
        i = 1;
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool saw_digit = false;
    bool after_point = false;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '.') {
            if (after_point) throw std::invalid_argument("rational: bad decimal " + text);
            after_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::invalid_argument("rational: bad decimal " + text);
        num = num * 10 + (c - '0');
        if (after_point) den *= 10;
        saw_digit = true;
    }
    if (!saw_digit) throw std::invalid_argument("rational: bad decimal " + text);
    return Rational(neg ? -num : num, den);
}

std::string Rational::to_fixed(int decimals) const {
    std::int64_t scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool neg = num_ < 0;
    const std::int64_t abs_num = neg ? -num_ : num_;
    // half-up: floor((|n|*scale*2 + d) / (2d))
    const std::int64_t scaled = (abs_num * scale * 2 + den_) / (2 * den_);
    std::int64_t whole = scaled / scale;
    std::int64_t frac = scaled % scale;
    std::string out = neg && scaled != 0 ? "-" : "";
    out += std::to_string(whole);
    if (decimals > 0) {
        std::string f = std::to_string(frac);
        out += "." + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
    }
    return out;
}

}  // namespace toolgap
