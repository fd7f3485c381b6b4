#pragma once

#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace greensched::csv {

/// Shortest round-trip representation; identical bytes for identical values.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw std::domain_error("csv: refusing to write a non-finite value");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
  return std::string(buf, end);
}

/// Writes one comma-separated line; the newline is emitted on destruction.
class Row {
 public:
  explicit Row(std::ostream& os) : os_(os) {}
  Row(const Row&) = delete;
  Row& operator=(const Row&) = delete;
  ~Row() { os_ << '\n'; }

  Row& operator<<(double v) { return cell(format_double(v)); }
  Row& operator<<(std::string_view s) { return cell(s); }
  Row& operator<<(const char* s) { return cell(s); }
  template <std::integral I>
  Row& operator<<(I v) {
    return cell(std::to_string(v));
  }

 private:
  Row& cell(std::string_view s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

}  // namespace greensched::csv
