#pragma once

#include <span>
#include <string>
#include <vector>

#include "radpipe/extract.hpp"
#include "radpipe/lexicon.hpp"
#include "radpipe/tagging.hpp"

namespace radpipe {

struct SynthConfig {
  uint64_t seed = 0;
  int n_reports = 600;
  double positive_fraction = 0.45;

  int n_locations = 12;
  int n_morphologies = 25;
  int n_densities = 10;
  int n_enhancements = 8;
  int n_modifiers = 10;
  int max_synonym_variants = 2;  // per word, 0..max sampled

  int planted_keys = 4;        // K
  double planted_beta = 3.0;   // shared coefficient
  double label_noise = 0.02;   // flip probability
  double distractor_rate = 0.1;  // sentences with no Location

  bool ascii_mode = false;  // ASCII tokens instead of CJK, for debugging
};

struct SynthReport {
  std::string report_id;
  std::u32string findings;  // sentences joined with U+3002
  std::vector<AnnotatedSentence> sentences;
  std::vector<std::vector<Entity>> sentence_entities;
  std::vector<std::string> gold_keys;  // canonical feature keys, first-occurrence order
  std::vector<uint8_t> z;              // planted-key indicators, size K
  int label = 0;
};

struct SynthCorpus {
  SynthConfig cfg;
  Lexicon lexicon;
  std::vector<std::u32string> words;  // words file content order
  std::vector<SynonymGroup> groups;   // synonyms file content order
  std::vector<SynthReport> reports;
  std::vector<std::string> planted_key_names;  // size K
  double beta0 = 0.0;          // intercept of the planted rule
  double presence_prob = 0.0;  // per-key presence probability solved for balance
};

/// Deterministic per seed. Labels follow the planted rule
/// 1[beta * sum(z) + beta0 > 0] flipped with probability label_noise; the
/// per-key presence probability is solved so the expected positive rate
/// hits positive_fraction. Gold annotations round-trip encode/decode and
/// gold keys reproduce the extract module's output by construction (both
/// verified at generation time). Throws when the balance target is
/// unreachable.
SynthCorpus synth_generate(const SynthConfig& cfg);

/// Writes words.txt, synonyms.tsv, corpus.tsv, reports.tsv and
/// gold_features.jsonl under dir (created if missing).
void synth_write(const SynthCorpus& corpus, const std::string& dir);

struct BayesGap {
  Prf bayes;      // the planted rule's optimal classifier vs the noisy labels
  Prf predicted;  // the supplied predictions vs the same labels
  double f1_gap = 0.0;  // predicted.f1 - bayes.f1
};

/// Compares predictions against the Bayes-optimal classifier (threshold
/// the planted probability at 1/2, i.e. predict 1 iff beta*sum(z)+beta0>0).
BayesGap oracle_eval(const SynthCorpus& corpus, std::span<const int> predicted_labels);

}  // namespace radpipe
