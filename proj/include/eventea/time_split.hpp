#pragma once

#include <string>
#include <string_view>

namespace eventea {

/// A name separated into its recognized time expressions and the rest.
struct TimeSplit {
  std::string time;       // matched expressions in order, joined by one space
  std::string remainder;  // name without them, whitespace collapsed
};

/// Rule-based time recognizer. Recognized forms, tried at each position with
/// the longest match winning (earlier rule on equal length):
///   yyyy-mm-dd;  yyyy-mm;  "Month d, yyyy" / "d Month yyyy";
///   year ranges yyyy-yy and yyyy-yyyy (hyphen, en dash or slash);
///   standalone years 1000-2999.
/// Matches must not be glued to neighbouring letters or digits.
TimeSplit split_time(std::string_view name);

}  // namespace eventea
