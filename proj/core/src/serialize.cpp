#include "radpipe/serialize.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace radpipe {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw std::runtime_error(where + ": bad number '" + std::string(token) + "'");
  return v;
}

TextWriter& TextWriter::word(std::string_view w) {
  if (line_started_) os_ << ' ';
  os_ << w;
  line_started_ = true;
  return *this;
}

TextWriter& TextWriter::num(double v) { return word(format_double(v)); }
TextWriter& TextWriter::num(long v) { return word(std::to_string(v)); }
TextWriter& TextWriter::num(uint64_t v) { return word(std::to_string(v)); }

TextWriter& TextWriter::nl() {
  os_ << '\n';
  line_started_ = false;
  return *this;
}

void TextWriter::mat(std::string_view key, const Mat& m) {
  word("mat").word(key).num(m.rows).num(m.cols).nl();
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) num(m(r, c));
    nl();
  }
}

void TextWriter::vec(std::string_view key, const Vec& v) {
  word("vec").word(key).num(static_cast<long>(v.size())).nl();
  for (double x : v) num(x);
  if (!v.empty()) nl();
}

std::string TextReader::next() {
  std::string tok;
  if (!(is_ >> tok)) fail("unexpected end of file");
  return tok;
}

void TextReader::expect(std::string_view token) {
  const std::string tok = next();
  if (tok != token)
    fail("expected '" + std::string(token) + "', got '" + tok + "'");
}

long TextReader::next_long() {
  const std::string tok = next();
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail("bad integer '" + tok + "'");
  return v;
}

uint64_t TextReader::next_u64() {
  const std::string tok = next();
  uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    fail("bad integer '" + tok + "'");
  return v;
}

double TextReader::next_double() { return parse_double(next(), name_); }

Mat TextReader::next_mat(std::string_view key) {
  expect("mat");
  expect(key);
  const long rows = next_long();
  const long cols = next_long();
  if (rows < 0 || cols < 0) fail("negative matrix shape for " + std::string(key));
  Mat m(static_cast<int>(rows), static_cast<int>(cols));
  for (double& v : m.a) v = next_double();
  return m;
}

Vec TextReader::next_vec(std::string_view key) {
  expect("vec");
  expect(key);
  const long n = next_long();
  if (n < 0) fail("negative vector size for " + std::string(key));
  Vec v(static_cast<size_t>(n));
  for (double& x : v) x = next_double();
  return v;
}

void TextReader::fail(const std::string& what) const {
  throw std::runtime_error(name_ + ": " + what);
}

}  // namespace radpipe
