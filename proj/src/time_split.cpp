#include "eventea/time_split.hpp"

#include <array>
#include <optional>

#include "eventea/unicode.hpp"

namespace eventea {

namespace {

using unicode::is_alnum;
using unicode::is_digit;
using unicode::is_space;

constexpr std::array<std::u32string_view, 12> kMonths = {
    U"january", U"february", U"march",     U"april",   U"may",      U"june",
    U"july",    U"august",   U"september", U"october", U"november", U"december"};

bool is_range_separator(char32_t c) { return c == U'-' || c == U'–' || c == U'/'; }

class Matcher {
 public:
  explicit Matcher(const std::u32string& s) : s_(s) {}

  // Length of the longest time expression starting at pos, or 0.
  std::size_t longest_at(std::size_t pos) const {
    if (!starts_token(pos)) return 0;
    std::size_t best = 0;
    for (auto rule : {&Matcher::full_date, &Matcher::year_month, &Matcher::month_day_year,
                      &Matcher::day_month_year, &Matcher::year_range, &Matcher::year}) {
      if (auto len = (this->*rule)(pos); len && *len > best && ends_token(pos + *len)) best = *len;
    }
    return best;
  }

 private:
  const std::u32string& s_;

  bool starts_token(std::size_t pos) const {
    if (pos == 0) return true;
    const char32_t prev = s_[pos - 1];
    if (is_alnum(prev)) return false;
    // "U-2010" style: a dash attached to a preceding word
    if (is_range_separator(prev) && pos >= 2 && is_alnum(s_[pos - 2])) return false;
    return true;
  }

  bool ends_token(std::size_t end) const {
    if (end >= s_.size()) return true;
    const char32_t next = s_[end];
    if (is_alnum(next)) return false;
    if (is_range_separator(next) && end + 1 < s_.size() && is_alnum(s_[end + 1])) return false;
    return true;
  }

  // Number of consecutive ASCII digits at pos (at most limit).
  std::size_t digits(std::size_t pos, std::size_t limit = 8) const {
    std::size_t n = 0;
    while (pos + n < s_.size() && n < limit && is_digit(s_[pos + n])) ++n;
    return n;
  }

  int value(std::size_t pos, std::size_t len) const {
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) v = v * 10 + static_cast<int>(s_[pos + i] - U'0');
    return v;
  }

  bool exact_digits(std::size_t pos, std::size_t len) const {
    return digits(pos, len + 1) == len;
  }

  bool valid_year(std::size_t pos) const {
    if (!exact_digits(pos, 4)) return false;
    const int y = value(pos, 4);
    return y >= 1000 && y <= 2999;
  }

  bool at(std::size_t pos, char32_t c) const { return pos < s_.size() && s_[pos] == c; }

  std::optional<std::size_t> full_date(std::size_t pos) const {
    if (!valid_year(pos) || !at(pos + 4, U'-') || !exact_digits(pos + 5, 2) || !at(pos + 7, U'-') ||
        !exact_digits(pos + 8, 2)) {
      return std::nullopt;
    }
    const int m = value(pos + 5, 2);
    const int d = value(pos + 8, 2);
    if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
    return 10;
  }

  std::optional<std::size_t> year_month(std::size_t pos) const {
    if (!valid_year(pos) || !at(pos + 4, U'-') || !exact_digits(pos + 5, 2)) return std::nullopt;
    const int m = value(pos + 5, 2);
    if (m < 1 || m > 12) return std::nullopt;
    return 7;
  }

  // Length of an English month name at pos (case-insensitive), or 0.
  std::size_t month(std::size_t pos) const {
    for (auto name : kMonths) {
      if (pos + name.size() > s_.size()) continue;
      bool ok = true;
      for (std::size_t i = 0; i < name.size() && ok; ++i) {
        char32_t c = s_[pos + i];
        if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
        ok = c == name[i];
      }
      if (ok && (pos + name.size() == s_.size() || !is_alnum(s_[pos + name.size()]))) return name.size();
    }
    return 0;
  }

  std::size_t spaces(std::size_t pos) const {
    std::size_t n = 0;
    while (pos + n < s_.size() && is_space(s_[pos + n])) ++n;
    return n;
  }

  std::optional<std::size_t> day(std::size_t pos) const {
    const std::size_t n = digits(pos, 3);
    if (n < 1 || n > 2) return std::nullopt;
    const int d = value(pos, n);
    if (d < 1 || d > 31) return std::nullopt;
    return n;
  }

  // "May 14, 2010" (comma optional)
  std::optional<std::size_t> month_day_year(std::size_t pos) const {
    std::size_t p = pos;
    const std::size_t m = month(p);
    if (!m) return std::nullopt;
    p += m;
    std::size_t sp = spaces(p);
    if (!sp) return std::nullopt;
    p += sp;
    auto d = day(p);
    if (!d) return std::nullopt;
    p += *d;
    if (at(p, U',')) ++p;
    sp = spaces(p);
    if (!sp) return std::nullopt;
    p += sp;
    if (!valid_year(p)) return std::nullopt;
    return p + 4 - pos;
  }

  // "14 May 2010"
  std::optional<std::size_t> day_month_year(std::size_t pos) const {
    std::size_t p = pos;
    auto d = day(p);
    if (!d) return std::nullopt;
    p += *d;
    std::size_t sp = spaces(p);
    if (!sp) return std::nullopt;
    p += sp;
    const std::size_t m = month(p);
    if (!m) return std::nullopt;
    p += m;
    sp = spaces(p);
    if (!sp) return std::nullopt;
    p += sp;
    if (!valid_year(p)) return std::nullopt;
    return p + 4 - pos;
  }

  std::optional<std::size_t> year_range(std::size_t pos) const {
    if (!valid_year(pos) || pos + 4 >= s_.size() || !is_range_separator(s_[pos + 4])) return std::nullopt;
    const std::size_t n = digits(pos + 5, 5);
    if (n == 2) return 7;
    if (n == 4 && valid_year(pos + 5)) return 9;
    return std::nullopt;
  }

  std::optional<std::size_t> year(std::size_t pos) const {
    if (!valid_year(pos)) return std::nullopt;
    return 4;
  }
};

std::u32string collapse(std::u32string_view s) {
  std::u32string out;
  bool pending = false;
  for (char32_t c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(U' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

TimeSplit split_time(std::string_view name) {
  const std::u32string s = unicode::to_u32(name);
  Matcher matcher(s);
  std::u32string time;
  std::u32string rest;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t len = matcher.longest_at(pos);
    if (len == 0) {
      rest.push_back(s[pos++]);
      continue;
    }
    if (!time.empty()) time.push_back(U' ');
    time += collapse(std::u32string_view(s).substr(pos, len));
    rest.push_back(U' ');
    pos += len;
  }
  return {unicode::to_utf8(time), unicode::to_utf8(collapse(rest))};
}

}  // namespace eventea
