#include "toolgap/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

namespace toolgap {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

const std::vector<std::string>& number_words() {
    static const std::vector<std::string> kWords = {
        "one",     "two",      "three",    "four",     "five",    "six",
        "seven",   "eight",    "nine",     "ten",      "eleven",  "twelve",
        "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen",
        "nineteen", "twenty",  "thirty",   "forty",    "fifty",   "sixty",
        "seventy", "eighty",   "ninety",   "hundred"};
    return kWords;
}

const std::vector<std::string>& hedging_markers() {
    static const std::vector<std::string> kMarkers = {
        "reportedly", "claimed", "it is said", "some say",   "might",
        "possibly",   "perhaps", "around",     "about",      "likely",
        "unverified", "not confirmed"};
    return kMarkers;
}

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : s) {
        if (is_word_char(c)) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

bool has_token(const std::vector<std::string>& tokens, std::string_view word) {
    return std::find(tokens.begin(), tokens.end(), word) != tokens.end();
}

bool has_phrase(const std::vector<std::string>& tokens, std::string_view phrase) {
    const std::vector<std::string> needle = tokenize(phrase);
    if (needle.empty()) return false;
    if (needle.size() == 1) return has_token(tokens, needle[0]);
    if (tokens.size() < needle.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<long>(i)))
            return true;
    }
    return false;
}

std::vector<std::string> extract_numerals(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            std::size_t j = i;
            bool seen_point = false;
            while (j < s.size()) {
                if (std::isdigit(static_cast<unsigned char>(s[j]))) {
                    ++j;
                } else if (s[j] == '.' && !seen_point && j + 1 < s.size() &&
                           std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                    seen_point = true;
                    ++j;
                } else {
                    break;
                }
            }
            out.emplace_back(s.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

int count_numerals(std::string_view s) {
    return static_cast<int>(extract_numerals(s).size());
}

bool has_digit(std::string_view s) {
    return std::any_of(s.begin(), s.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

bool has_fraction(std::string_view s) {
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '/' && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(s[i + 1])))
            return true;
    }
    return false;
}

bool has_number_word(const std::vector<std::string>& tokens) {
    for (const auto& w : number_words()) {
        if (has_token(tokens, w)) return true;
    }
    return false;
}

std::optional<double> parse_number(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

bool numeric_equal(double a, double b, double tol) {
    return std::fabs(a - b) <= tol;
}

bool values_equal(std::string_view a, std::string_view b, double tol) {
    const auto na = parse_number(a);
    const auto nb = parse_number(b);
    if (na && nb) return numeric_equal(*na, *nb, tol);
    return to_lower(trim(a)) == to_lower(trim(b));
}

std::string normalize_for_contains(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (is_word_char(c)) {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

int hedging_marker_count(std::string_view s) {
    const std::vector<std::string> tokens = tokenize(s);
    int count = 0;
    for (const auto& marker : hedging_markers()) {
        const std::vector<std::string> needle = tokenize(marker);
        if (needle.size() == 1) {
            count += static_cast<int>(std::count(tokens.begin(), tokens.end(), needle[0]));
        } else {
            for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
                if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<long>(i)))
                    ++count;
            }
        }
    }
    return count;
}

}  // namespace toolgap
