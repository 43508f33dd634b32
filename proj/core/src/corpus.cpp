#include "radpipe/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include "radpipe/utf8.hpp"

namespace radpipe {

namespace {

[[noreturn]] void corpus_error(const std::string& path, long lineno, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace

std::vector<CorpusReport> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);

  std::vector<CorpusReport> reports;
  CorpusReport current;
  bool have_report = false;
  AnnotatedSentence sent;
  std::string line;
  long lineno = 0;

  auto flush_sentence = [&]() {
    if (sent.chars.empty()) return;
    if (!have_report) {
      have_report = true;  // bare corpus without -DOC- markers
    }
    current.sentences.push_back(std::move(sent));
    sent = {};
  };
  auto flush_report = [&]() {
    flush_sentence();
    if (have_report) reports.push_back(std::move(current));
    current = {};
    have_report = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush_sentence();
      continue;
    }
    if (line.rfind("-DOC-", 0) == 0) {
      flush_report();
      const size_t sp1 = line.find(' ');
      const size_t sp2 = sp1 == std::string::npos ? std::string::npos : line.find(' ', sp1 + 1);
      if (sp1 == std::string::npos || sp2 == std::string::npos)
        corpus_error(path, lineno, "malformed -DOC- line");
      current.report_id = line.substr(sp1 + 1, sp2 - sp1 - 1);
      const std::string lab = line.substr(sp2 + 1);
      if (lab != "0" && lab != "1") corpus_error(path, lineno, "report label must be 0 or 1");
      current.label = lab == "1" ? 1 : 0;
      have_report = true;
      continue;
    }
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) corpus_error(path, lineno, "expected '<char>\\t<tag>'");
    std::u32string ch;
    try {
      ch = utf8_decode(line.substr(0, tab));
    } catch (const std::exception&) {
      corpus_error(path, lineno, "invalid UTF-8 in character field");
    }
    if (ch.size() != 1) corpus_error(path, lineno, "character field must hold exactly one character");
    BieosTag tag;
    try {
      tag = BieosTag::parse(line.substr(tab + 1));
    } catch (const std::exception& e) {
      corpus_error(path, lineno, e.what());
    }
    sent.chars.push_back(ch[0]);
    sent.tags.push_back(tag);
  }
  flush_report();
  return reports;
}

void save_corpus(const std::string& path, const std::vector<CorpusReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const CorpusReport& r : reports) {
    if (!r.report_id.empty()) out << "-DOC- " << r.report_id << ' ' << r.label << '\n';
    for (const AnnotatedSentence& s : r.sentences) {
      for (size_t i = 0; i < s.chars.size(); ++i)
        out << utf8_encode(s.chars[i]) << '\t' << s.tags[i].name() << '\n';
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<AnnotatedSentence> corpus_sentences(const std::vector<CorpusReport>& reports) {
  std::vector<AnnotatedSentence> out;
  for (const CorpusReport& r : reports)
    for (const AnnotatedSentence& s : r.sentences) out.push_back(s);
  return out;
}

}  // namespace radpipe
