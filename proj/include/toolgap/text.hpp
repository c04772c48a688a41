#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toolgap {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercase alphanumeric word tokens; punctuation and apostrophes split.
std::vector<std::string> tokenize(std::string_view s);

bool has_token(const std::vector<std::string>& tokens, std::string_view word);

// Consecutive-token phrase match ("some say", "in a different").
bool has_phrase(const std::vector<std::string>& tokens, std::string_view phrase);

// Numeric literals: digit runs with an optional single decimal point.
std::vector<std::string> extract_numerals(std::string_view s);
int count_numerals(std::string_view s);

bool has_digit(std::string_view s);
// "1/2"-style digit fractions.
bool has_fraction(std::string_view s);
// Written numbers one..hundred.
bool has_number_word(const std::vector<std::string>& tokens);

// Strict full-string numeric parse ("72", "72.0", "-3.5e2").
std::optional<double> parse_number(std::string_view s);
bool numeric_equal(double a, double b, double tol);

// True when both parse numerically and agree within tol, or the case-folded
// trimmed strings are equal.
bool values_equal(std::string_view a, std::string_view b, double tol);

// Lowercase, punctuation folded to single spaces, trimmed.
std::string normalize_for_contains(std::string_view s);

// Occurrences of epistemic hedging markers (reportedly, some say, might, ...).
int hedging_marker_count(std::string_view s);

}  // namespace toolgap
