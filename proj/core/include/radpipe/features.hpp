#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace radpipe {

/// Feature keys of one report plus its label.
struct ReportKeys {
  std::string report_id;
  int label = 0;
  std::vector<std::string> keys;
};

/// Feature vocabulary ordered by (document count descending, key
/// ascending); every retained key occurs in at least min_count reports.
struct FeatureVocab {
  std::vector<std::string> keys;
  std::vector<long> doc_counts;
  int min_count = 1;
  std::unordered_map<std::string, int> index;

  int find(const std::string& key) const {
    const auto it = index.find(key);
    return it == index.end() ? -1 : it->second;
  }
};

/// Document frequency is presence per report, not multiplicity.
FeatureVocab build_vocab(std::span<const ReportKeys> reports, int min_count);

/// Binary presence matrix over the vocabulary columns.
struct FeatureMatrix {
  std::vector<std::string> report_ids;
  std::vector<int> labels;  // 1 = positive (liver cancer)
  std::vector<std::string> keys;
  std::vector<std::vector<uint8_t>> x;  // rows over keys, entries 0/1

  int rows() const { return static_cast<int>(x.size()); }
  int cols() const { return static_cast<int>(keys.size()); }

  /// CSV with header `report_id,label,<key1>,...`; keys and ids are
  /// percent-encoded where they contain ',', '%', CR or LF. Round-trips
  /// exactly.
  void save_csv(const std::string& path) const;
  static FeatureMatrix load_csv(const std::string& path);
};

/// Out-of-vocabulary keys are ignored. Throws on duplicate report ids.
FeatureMatrix vectorize(const FeatureVocab& vocab, std::span<const ReportKeys> reports);

}  // namespace radpipe
