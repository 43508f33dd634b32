#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace radpipe {

/// Per-character tag produced by lexicon segmentation. Multi-character
/// matches are tagged B (I)* E, single-character matches S, everything
/// else None.
enum class SegTag : uint8_t { B = 0, I = 1, E = 2, S = 3, None = 4 };

inline constexpr int kNumSegTags = 5;

const char* to_string(SegTag t);

struct U32Hash {
  using is_transparent = void;
  size_t operator()(std::u32string_view s) const {
    return std::hash<std::u32string_view>{}(s);
  }
};
struct U32Eq {
  using is_transparent = void;
  bool operator()(std::u32string_view a, std::u32string_view b) const { return a == b; }
};

struct SynonymGroup {
  std::u32string canonical;
  std::vector<std::u32string> variants;  // includes the canonical itself
};

/// Domain word list plus synonym groups. Immutable after construction;
/// all operations are read-only and safe from concurrent callers.
class Lexicon {
 public:
  Lexicon() = default;
  /// Validates the invariants: no empty or '/'-containing word, each
  /// variant claimed by at most one group, canonical self-mapping.
  Lexicon(std::vector<std::u32string> words, std::vector<SynonymGroup> groups);

  /// Reads the two lexicon files. Words file: one word per line, '#'
  /// comment lines skipped, trailing whitespace stripped, duplicates
  /// dropped. Synonyms file: TAB-separated, canonical first.
  static Lexicon load(const std::string& words_path, const std::string& synonyms_path);

  bool contains(std::u32string_view w) const { return words_.find(w) != words_.end(); }
  size_t word_count() const { return words_.size(); }
  size_t group_count() const { return groups_.size(); }
  int max_word_len() const { return max_word_len_; }
  const std::vector<std::u32string>& word_list() const { return word_list_; }
  const std::vector<SynonymGroup>& groups() const { return groups_; }

  /// Forward maximum matching: strict left-to-right greedy scan, longest
  /// lexicon word starting at each position wins, unmatched characters
  /// get None. Output length equals input length.
  std::vector<SegTag> segment_fmm(std::u32string_view text) const;

  /// Canonical form of a surface, or the surface itself when it belongs
  /// to no synonym group. Idempotent.
  std::u32string normalize(std::u32string_view surface) const;

 private:
  std::unordered_set<std::u32string, U32Hash, U32Eq> words_;
  std::vector<std::u32string> word_list_;  // load order, deduplicated
  std::vector<SynonymGroup> groups_;
  std::unordered_map<std::u32string, std::u32string, U32Hash, U32Eq> canonical_of_;
  int max_word_len_ = 0;
};

}  // namespace radpipe
