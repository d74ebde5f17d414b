#ifndef LCP_TEXT_UTIL_H_
#define LCP_TEXT_UTIL_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lcp {

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

// Splits on a single delimiter character, keeping empty fields.
std::vector<std::string_view> split(std::string_view text, char delimiter);
// Splits on runs of spaces and tabs.
std::vector<std::string_view> split_whitespace(std::string_view text);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);
std::optional<bool> parse_bool(std::string_view text);

// Shortest representation that reads back to the same double.
std::string format_double(double value);

// One "key = value" line of a config file.
struct KeyValueLine {
  int line_number = 0;
  std::string key;
  std::string value;
};

// Reads "key = value" lines; '#' starts a comment, blank lines are skipped.
// Lines without '=' raise ConfigError.
std::vector<KeyValueLine> read_key_values(std::istream& in);

}  // namespace lcp

#endif  // LCP_TEXT_UTIL_H_
