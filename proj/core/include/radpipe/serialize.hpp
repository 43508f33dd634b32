#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "radpipe/mat.hpp"

namespace radpipe {

/// Shortest exact decimal for a double: 17 significant digits, trailing
/// zeros trimmed by the general format. Parsing it back recovers the bit
/// pattern, so save -> load -> save is byte-identical.
std::string format_double(double v);
double parse_double(std::string_view token, const std::string& where);

/// Whitespace-token writer for the versioned model file format.
/// One logical record per line; matrices follow as one line per row.
class TextWriter {
 public:
  explicit TextWriter(std::ostream& os) : os_(os) {}

  TextWriter& word(std::string_view w);
  TextWriter& num(double v);
  TextWriter& num(long v);
  TextWriter& num(int v) { return num(static_cast<long>(v)); }
  TextWriter& num(uint64_t v);
  TextWriter& nl();

  void mat(std::string_view key, const Mat& m);
  void vec(std::string_view key, const Vec& v);

 private:
  std::ostream& os_;
  bool line_started_ = false;
};

/// Whitespace-token reader matching TextWriter. Throws std::runtime_error
/// with the stream name on any mismatch.
class TextReader {
 public:
  TextReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

  std::string next();
  void expect(std::string_view token);
  long next_long();
  uint64_t next_u64();
  double next_double();
  Mat next_mat(std::string_view key);
  Vec next_vec(std::string_view key);

  const std::string& name() const { return name_; }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::istream& is_;
  std::string name_;
};

}  // namespace radpipe
