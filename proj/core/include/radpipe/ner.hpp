#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "radpipe/crf.hpp"
#include "radpipe/lexicon.hpp"
#include "radpipe/lstm.hpp"
#include "radpipe/tagging.hpp"

namespace radpipe {

struct NerConfig {
  int char_emb_dim = 64;
  int segtag_emb_dim = 8;  // 0 trains the pure-character ablation
  int hidden = 100;        // per direction
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 50;
  int batch_size = 8;
  int patience = 5;
  uint64_t seed = 0;
  std::string pretrained_path;  // optional embedding file, see load_pretrained_embeddings
};

/// Character embedding + lexicon-feature embedding, BiLSTM over the fused
/// sequence, linear projection to per-tag emissions, linear-chain CRF.
struct NerModel {
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  NerConfig config;
  std::unordered_map<char32_t, int> char_vocab;  // real characters, ids from 2
  std::vector<char32_t> id_to_char;              // aligned with embedding rows, ids >= 2
  Param char_embeddings;                         // V x char_emb_dim
  Param segtag_embeddings;                       // kNumSegTags x segtag_emb_dim
  LstmCellParams fwd, bwd;
  Param proj_w;  // 2H x 21
  Param proj_b;  // 21 x 1
  CrfParams crf;

  NerModel() = default;
  /// Allocates and seeds all parameters for the given vocabulary.
  NerModel(const NerConfig& cfg, const std::vector<char32_t>& vocab_chars);

  int input_dim() const { return config.char_emb_dim + config.segtag_emb_dim; }
  int vocab_size() const { return static_cast<int>(id_to_char.size()) + 2; }
  int char_id(char32_t c) const;

  std::vector<Param*> params();

  void save(std::ostream& os) const;
  void save(const std::string& path) const;
  static NerModel load(std::istream& is, const std::string& name);
  static NerModel load(const std::string& path);
};

struct NerTrainReport {
  std::vector<double> train_loss;  // per epoch, mean sentence NLL
  std::vector<double> dev_f1;      // per epoch, entity F1 on dev
  int best_epoch = 0;              // 1-based; 0 when no dev evaluation ran
  std::string stop_reason;         // "patience" or "max_epochs"
};

/// Per-position concat(char_embedding, segtag_embedding); unknown chars
/// use the UNK row. Lengths must match.
std::vector<Vec> embed_sentence(const NerModel& model, std::u32string_view chars,
                                std::span<const SegTag> segtags);

/// Trains the full model: vocabulary from the corpus, seeded shuffling,
/// mean-NLL minibatches, Adam, per-epoch dev entity-F1 with constrained
/// decoding, early stopping on `patience` epochs without improvement.
/// The returned model holds the best-dev-F1 snapshot.
std::pair<NerModel, NerTrainReport> train_ner(const std::vector<AnnotatedSentence>& corpus,
                                              const Lexicon& lex, const NerConfig& cfg,
                                              const std::vector<AnnotatedSentence>& dev);

/// segment -> embed -> BiLSTM -> project -> constrained Viterbi -> entities.
/// The BIEOS mask makes the decode_entities repair path unreachable.
std::vector<Entity> tag_sentence(const NerModel& model, const Lexicon& lex,
                                 std::u32string_view chars);

/// Text embedding file: optional "<count> <dim>" header line, then one
/// entry per line: a single character followed by <dim> reals.
std::unordered_map<char32_t, Vec> load_pretrained_embeddings(const std::string& path);

}  // namespace radpipe
