#pragma once

#include <istream>
#include <string>
#include <vector>

namespace impact {

inline constexpr const char* kModelMagic = "IMPACT-MODEL v1";

/// Line reader for the textual model formats. Every line is "key values...";
/// errors carry the line number.
class ModelReader {
 public:
  explicit ModelReader(std::istream& in, std::string source = "model") : in_(in), source_(std::move(source)) {}

  /// Next non-empty line split on whitespace.
  std::vector<std::string> next();
  /// Next line, which must start with `key` and have exactly `arity` values.
  std::vector<std::string> expect(const std::string& key, std::size_t arity);
  std::string expect_value(const std::string& key);
  [[noreturn]] void fail(const std::string& message) const;
  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

std::size_t parse_count(const std::string& text);

}  // namespace impact
