#include "radpipe/lexicon.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "radpipe/utf8.hpp"

namespace radpipe {

const char* to_string(SegTag t) {
  switch (t) {
    case SegTag::B: return "B";
    case SegTag::I: return "I";
    case SegTag::E: return "E";
    case SegTag::S: return "S";
    case SegTag::None: return "None";
  }
  return "?";
}

namespace {

void check_word(std::u32string_view w, const std::string& where) {
  if (w.empty()) throw std::runtime_error(where + ": empty word");
  if (w.find(U'/') != std::u32string_view::npos)
    throw std::runtime_error(where + ": word '" + utf8_encode(std::u32string(w)) +
                             "' contains '/', which is reserved for feature keys");
}

std::string strip_trailing(std::string line) {
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
    line.pop_back();
  return line;
}

}  // namespace

Lexicon::Lexicon(std::vector<std::u32string> words, std::vector<SynonymGroup> groups) {
  for (auto& w : words) {
    check_word(w, "lexicon");
    if (words_.insert(w).second) {
      max_word_len_ = std::max(max_word_len_, static_cast<int>(w.size()));
      word_list_.push_back(w);
    }
  }
  std::unordered_map<std::u32string, size_t, U32Hash, U32Eq> claimed_by;
  for (auto& g : groups) {
    check_word(g.canonical, "lexicon synonyms");
    const size_t gi = groups_.size();
    SynonymGroup stored;
    stored.canonical = g.canonical;
    auto claim = [&](const std::u32string& v) {
      check_word(v, "lexicon synonyms");
      auto [it, inserted] = claimed_by.emplace(v, gi);
      if (!inserted) {
        if (it->second == gi) return;  // duplicate within the same group
        throw std::runtime_error("lexicon synonyms: variant '" + utf8_encode(v) +
                                 "' appears in more than one group");
      }
      canonical_of_.emplace(v, g.canonical);
      stored.variants.push_back(v);
    };
    claim(g.canonical);  // canonical is implicitly its own variant
    for (auto& v : g.variants) claim(v);
    groups_.push_back(std::move(stored));
  }
}

Lexicon Lexicon::load(const std::string& words_path, const std::string& synonyms_path) {
  std::ifstream wf(words_path, std::ios::binary);
  if (!wf) throw std::runtime_error("cannot open words file: " + words_path);

  std::vector<std::u32string> words;
  std::string line;
  long lineno = 0;
  while (std::getline(wf, line)) {
    ++lineno;
    line = strip_trailing(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    std::u32string w;
    try {
      w = utf8_decode(line);
    } catch (const std::exception&) {
      throw std::runtime_error(words_path + ":" + std::to_string(lineno) + ": malformed line");
    }
    if (w.find(U'/') != std::u32string::npos)
      throw std::runtime_error(words_path + ":" + std::to_string(lineno) +
                               ": word contains reserved character '/'");
    words.push_back(std::move(w));
  }

  std::ifstream sf(synonyms_path, std::ios::binary);
  if (!sf) throw std::runtime_error("cannot open synonyms file: " + synonyms_path);

  std::vector<SynonymGroup> groups;
  lineno = 0;
  while (std::getline(sf, line)) {
    ++lineno;
    line = strip_trailing(std::move(line));
    if (line.empty() || line[0] == '#') continue;
    SynonymGroup g;
    size_t pos = 0;
    int field = 0;
    while (pos <= line.size()) {
      const size_t tab = line.find('\t', pos);
      const std::string part = line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos);
      if (part.empty())
        throw std::runtime_error(synonyms_path + ":" + std::to_string(lineno) +
                                 ": malformed line (empty field)");
      std::u32string w;
      try {
        w = utf8_decode(part);
      } catch (const std::exception&) {
        throw std::runtime_error(synonyms_path + ":" + std::to_string(lineno) + ": malformed line");
      }
      if (field == 0)
        g.canonical = w;
      g.variants.push_back(std::move(w));
      ++field;
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    groups.push_back(std::move(g));
  }

  return Lexicon(std::move(words), std::move(groups));
}

std::vector<SegTag> Lexicon::segment_fmm(std::u32string_view text) const {
  std::vector<SegTag> tags(text.size(), SegTag::None);
  const size_t n = text.size();
  size_t i = 0;
  while (i < n) {
    size_t best = 0;
    const size_t cap = std::min(static_cast<size_t>(max_word_len_), n - i);
    for (size_t len = cap; len >= 1; --len) {
      if (contains(text.substr(i, len))) {
        best = len;
        break;
      }
    }
    if (best == 0) {
      ++i;  // tag already None
    } else if (best == 1) {
      tags[i] = SegTag::S;
      ++i;
    } else {
      tags[i] = SegTag::B;
      for (size_t k = 1; k + 1 < best; ++k) tags[i + k] = SegTag::I;
      tags[i + best - 1] = SegTag::E;
      i += best;
    }
  }
  return tags;
}

std::u32string Lexicon::normalize(std::u32string_view surface) const {
  const auto it = canonical_of_.find(surface);
  if (it == canonical_of_.end()) return std::u32string(surface);
  return it->second;
}

}  // namespace radpipe
