#include "radpipe/features.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace radpipe {

FeatureVocab build_vocab(std::span<const ReportKeys> reports, int min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");
  std::map<std::string, long> counts;
  for (const ReportKeys& r : reports) {
    std::set<std::string> uniq(r.keys.begin(), r.keys.end());
    for (const std::string& k : uniq) ++counts[k];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [k, c] : counts)
    if (c >= min_count) kept.emplace_back(k, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  FeatureVocab v;
  v.min_count = min_count;
  for (auto& [k, c] : kept) {
    v.index.emplace(k, static_cast<int>(v.keys.size()));
    v.keys.push_back(k);
    v.doc_counts.push_back(c);
  }
  return v;
}

FeatureMatrix vectorize(const FeatureVocab& vocab, std::span<const ReportKeys> reports) {
  FeatureMatrix m;
  m.keys = vocab.keys;
  std::unordered_set<std::string> seen;
  for (const ReportKeys& r : reports) {
    if (!seen.insert(r.report_id).second)
      throw std::runtime_error("vectorize: duplicate report id '" + r.report_id + "'");
    std::vector<uint8_t> row(vocab.keys.size(), 0);
    for (const std::string& k : r.keys) {
      const int j = vocab.find(k);
      if (j >= 0) row[j] = 1;
    }
    m.report_ids.push_back(r.report_id);
    m.labels.push_back(r.label);
    m.x.push_back(std::move(row));
  }
  return m;
}

namespace {

std::string percent_encode(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (c == ',' || c == '%' || c == '\r' || c == '\n') {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

std::string percent_decode(const std::string& s, const std::string& where) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    if (i + 2 >= s.size()) throw std::runtime_error(where + ": truncated percent escape");
    const auto hexval = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      throw std::runtime_error(where + ": bad percent escape");
    };
    out += static_cast<char>(hexval(s[i + 1]) * 16 + hexval(s[i + 2]));
    i += 2;
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void FeatureMatrix::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path);
  out << "report_id,label";
  for (const std::string& k : keys) out << ',' << percent_encode(k);
  out << '\n';
  for (size_t i = 0; i < x.size(); ++i) {
    out << percent_encode(report_ids[i]) << ',' << labels[i];
    for (uint8_t v : x[i]) out << ',' << static_cast<int>(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

FeatureMatrix FeatureMatrix::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  FeatureMatrix m;
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "report_id" || header[1] != "label")
    throw std::runtime_error(path + ": bad header");
  for (size_t i = 2; i < header.size(); ++i) m.keys.push_back(percent_decode(header[i], path));

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": wrong field count");
    m.report_ids.push_back(percent_decode(fields[0], path));
    if (fields[1] != "0" && fields[1] != "1")
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": label must be 0 or 1");
    m.labels.push_back(fields[1] == "1" ? 1 : 0);
    std::vector<uint8_t> row(m.keys.size());
    for (size_t j = 0; j < m.keys.size(); ++j) {
      if (fields[2 + j] != "0" && fields[2 + j] != "1")
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": cell must be 0 or 1");
      row[j] = fields[2 + j] == "1" ? 1 : 0;
    }
    m.x.push_back(std::move(row));
  }
  return m;
}

}  // namespace radpipe
