#include "radpipe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "radpipe/corpus.hpp"
#include "radpipe/eval.hpp"
#include "radpipe/rng.hpp"
#include "radpipe/utf8.hpp"

namespace radpipe {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kTypeCount = kNumEntityTypes;

struct WordBank {
  // canonical words per entity type, then variants per canonical
  std::vector<std::u32string> canon[kTypeCount];
  std::vector<std::vector<std::u32string>> variants[kTypeCount];
};

char32_t lex_char(Rng& rng, bool ascii) {
  if (ascii) return U'a' + static_cast<char32_t>(rng.below(26));
  return 0x4E00 + static_cast<char32_t>(rng.below(0x200));
}

char32_t filler_char(Rng& rng, bool ascii) {
  if (ascii) return U'A' + static_cast<char32_t>(rng.below(26));
  return 0x5500 + static_cast<char32_t>(rng.below(0x100));
}

std::u32string fresh_word(Rng& rng, bool ascii, int min_len, int max_len,
                          std::unordered_set<std::u32string, U32Hash, U32Eq>& used) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int len = rng.range(min_len, max_len);
    std::u32string w;
    for (int i = 0; i < len; ++i) w.push_back(lex_char(rng, ascii));
    if (used.insert(w).second) return w;
  }
  throw std::runtime_error("synth_generate: word pool exhausted");
}

/// P(Binomial(k, q) >= s)
double binom_tail(int k, double q, int s) {
  double total = 0.0;
  for (int i = s; i <= k; ++i) {
    double c = 1.0;
    for (int j = 0; j < i; ++j) c = c * (k - j) / (j + 1);
    total += c * std::pow(q, i) * std::pow(1.0 - q, k - i);
  }
  return total;
}

struct SentencePlan {
  std::u32string chars;
  std::vector<Entity> entities;

  void add_filler(Rng& rng, bool ascii, int min_len, int max_len) {
    const int len = rng.range(min_len, max_len);
    for (int i = 0; i < len; ++i) chars.push_back(filler_char(rng, ascii));
  }

  void add_entity(EntityType t, const std::u32string& surface) {
    const int start = static_cast<int>(chars.size());
    chars += surface;
    entities.push_back({t, start, start + static_cast<int>(surface.size()), surface});
  }
};

}  // namespace

SynthCorpus synth_generate(const SynthConfig& cfg) {
  if (cfg.n_reports < 1) throw std::invalid_argument("synth_generate: n_reports must be >= 1");
  if (cfg.planted_keys < 1) throw std::invalid_argument("synth_generate: planted_keys must be >= 1");
  if (cfg.planted_keys > cfg.n_locations)
    throw std::invalid_argument("synth_generate: planted_keys exceeds the location vocabulary");
  if (cfg.label_noise < 0.0 || cfg.label_noise >= 0.5)
    throw std::invalid_argument("synth_generate: label_noise must be in [0, 0.5)");

  // Balance: labels are 1[beta*S + beta0 > 0] with S ~ Binomial(K, q),
  // flipped with probability eps. beta0 sits mid-cell so the Bayes
  // boundary is robust; q is solved so the positive rate hits the target.
  const int k = cfg.planted_keys;
  const int s_star = std::max(1, k - 1);
  const double beta0 = -cfg.planted_beta * (static_cast<double>(s_star) - 0.5);
  const double eps = cfg.label_noise;
  const double target = (cfg.positive_fraction - eps) / (1.0 - 2.0 * eps);
  if (!(target > 0.0 && target < 1.0))
    throw std::runtime_error("synth_generate: positive_fraction " +
                             std::to_string(cfg.positive_fraction) +
                             " is unreachable at label_noise " + std::to_string(eps));
  double lo = 1e-9, hi = 1.0 - 1e-9;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (binom_tail(k, mid, s_star) < target ? lo : hi) = mid;
  }
  const double presence = 0.5 * (lo + hi);

  Rng rng(cfg.seed);
  const bool ascii = cfg.ascii_mode;

  // --- vocabulary ------------------------------------------------------
  const int type_counts[kTypeCount] = {cfg.n_locations, cfg.n_morphologies, cfg.n_densities,
                                       cfg.n_enhancements, cfg.n_modifiers};
  const int len_lo[kTypeCount] = {2, 4, 3, 3, 2};
  const int len_hi[kTypeCount] = {3, 6, 5, 6, 4};

  WordBank bank;
  SynthCorpus corpus;
  corpus.cfg = cfg;
  corpus.beta0 = beta0;
  corpus.presence_prob = presence;

  std::unordered_set<std::u32string, U32Hash, U32Eq> used;
  for (int t = 0; t < kTypeCount; ++t) {
    if (type_counts[t] < 1)
      throw std::invalid_argument("synth_generate: every entity type needs at least one word");
    for (int i = 0; i < type_counts[t]; ++i) {
      std::u32string w = fresh_word(rng, ascii, len_lo[t], len_hi[t], used);
      corpus.words.push_back(w);
      std::vector<std::u32string> vars;
      const int n_var = cfg.max_synonym_variants > 0 ? rng.range(0, cfg.max_synonym_variants) : 0;
      for (int v = 0; v < n_var; ++v) {
        // Variant = canonical plus one trailing character, kept unique.
        std::u32string var;
        for (int attempt = 0; attempt < 1000; ++attempt) {
          var = w;
          var.push_back(lex_char(rng, ascii));
          if (used.insert(var).second) break;
          var.clear();
        }
        if (var.empty()) throw std::runtime_error("synth_generate: variant pool exhausted");
        corpus.words.push_back(var);
        vars.push_back(var);
      }
      if (!vars.empty()) {
        SynonymGroup g;
        g.canonical = w;
        g.variants.push_back(w);
        for (const auto& v : vars) g.variants.push_back(v);
        corpus.groups.push_back(g);
      }
      bank.canon[t].push_back(std::move(w));
      bank.variants[t].push_back(std::move(vars));
    }
  }
  corpus.lexicon = Lexicon(corpus.words, corpus.groups);

  // --- planted keys ----------------------------------------------------
  // Distinct locations; trailing types cycle Morphology, Density, Enhancement.
  const EntityType cycle[3] = {EntityType::Morphology, EntityType::Density,
                               EntityType::Enhancement};
  struct PlantedKey {
    int loc;
    EntityType type;
    int word;
  };
  std::vector<PlantedKey> planted;
  int type_cursor[kTypeCount] = {0, 0, 0, 0, 0};
  for (int i = 0; i < k; ++i) {
    const EntityType t = cycle[i % 3];
    const int ti = static_cast<int>(t);
    if (type_cursor[ti] >= type_counts[ti])
      throw std::invalid_argument("synth_generate: not enough words to plant " +
                                  std::to_string(k) + " keys");
    planted.push_back({i, t, type_cursor[ti]});
    ++type_cursor[ti];
    RadFeature f{{bank.canon[0][i], bank.canon[ti][planted.back().word]}};
    corpus.planted_key_names.push_back(f.key());
  }
  auto is_planted_pair = [&](int loc, EntityType t, int word) {
    for (const PlantedKey& pk : planted)
      if (pk.loc == loc && pk.type == t && pk.word == word) return true;
    return false;
  };

  // --- reports ---------------------------------------------------------
  auto surface_of = [&](EntityType t, int word) -> const std::u32string& {
    const int ti = static_cast<int>(t);
    const auto& vars = bank.variants[ti][word];
    if (!vars.empty() && rng.bernoulli(0.4))
      return vars[static_cast<size_t>(rng.below(vars.size()))];
    return bank.canon[ti][word];
  };

  auto sample_word = [&](EntityType t, int loc) {
    const int ti = static_cast<int>(t);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const int w = static_cast<int>(rng.below(static_cast<uint64_t>(type_counts[ti])));
      if (!is_planted_pair(loc, t, w)) return w;
    }
    throw std::runtime_error("synth_generate: cannot avoid planted pairs");
  };

  // Trailing-entity shapes for filler parts, drawn uniformly. M = Morphology,
  // D = Density, E = Enhancement, X = Modifier.
  static const std::vector<std::vector<EntityType>> kPatterns = {
      {EntityType::Morphology},
      {EntityType::Morphology, EntityType::Morphology},
      {EntityType::Density},
      {EntityType::Enhancement},
      {EntityType::Enhancement, EntityType::Modifier},
      {EntityType::Density, EntityType::Modifier},
      {EntityType::Enhancement, EntityType::Density, EntityType::Modifier},
      {EntityType::Density, EntityType::Modifier, EntityType::Enhancement},
      {EntityType::Morphology, EntityType::Density},
      {},  // bare Location
  };

  auto emit_part = [&](SentencePlan& plan, int loc, std::span<const EntityType> shape) {
    plan.add_entity(EntityType::Location, surface_of(EntityType::Location, loc));
    if (rng.bernoulli(0.35)) plan.add_filler(rng, ascii, 1, 2);
    bool first = true;
    for (EntityType t : shape) {
      if (!first && rng.bernoulli(0.5)) plan.chars.push_back(U'\xFF0C');  // full-width comma
      first = false;
      plan.add_entity(t, surface_of(t, sample_word(t, loc)));
    }
  };

  for (int r = 0; r < cfg.n_reports; ++r) {
    SynthReport rep;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "R%04d", r + 1);
    rep.report_id = idbuf;

    rep.z.resize(k);
    int s = 0;
    for (int i = 0; i < k; ++i) {
      rep.z[i] = rng.bernoulli(presence) ? 1 : 0;
      s += rep.z[i];
    }
    const bool base = cfg.planted_beta * s + beta0 > 0.0;
    rep.label = (base != rng.bernoulli(eps)) ? 1 : 0;

    std::vector<SentencePlan> plans;
    for (int i = 0; i < k; ++i) {
      if (!rep.z[i]) continue;
      SentencePlan plan;
      if (rng.bernoulli(0.2)) plan.add_filler(rng, ascii, 1, 2);
      plan.add_entity(EntityType::Location, surface_of(EntityType::Location, planted[i].loc));
      if (rng.bernoulli(0.35)) plan.add_filler(rng, ascii, 1, 2);
      plan.add_entity(planted[i].type, surface_of(planted[i].type, planted[i].word));
      plans.push_back(std::move(plan));
    }
    const int n_filler = rng.range(2, 4);
    for (int f = 0; f < n_filler; ++f) {
      SentencePlan plan;
      if (rng.bernoulli(cfg.distractor_rate)) {
        // No Location: everything here is dropped by the extractor.
        const int n_ent = rng.range(1, 2);
        plan.add_filler(rng, ascii, 1, 2);
        for (int e = 0; e < n_ent; ++e) {
          const EntityType t = static_cast<EntityType>(1 + rng.below(4));
          plan.add_entity(t, surface_of(t, static_cast<int>(rng.below(
                                               static_cast<uint64_t>(type_counts[static_cast<int>(t)])))));
          if (e + 1 < n_ent) plan.chars.push_back(U'\xFF0C');
        }
      } else {
        if (rng.bernoulli(0.2)) plan.add_filler(rng, ascii, 1, 2);
        const int n_parts = rng.bernoulli(0.3) ? 2 : 1;
        for (int p = 0; p < n_parts; ++p) {
          if (p > 0 && rng.bernoulli(0.8)) plan.chars.push_back(U'\xFF0C');
          const int loc = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.n_locations)));
          const auto& shape = kPatterns[static_cast<size_t>(rng.below(kPatterns.size()))];
          emit_part(plan, loc, shape);
        }
      }
      plans.push_back(std::move(plan));
    }
    rng.shuffle(plans);

    for (SentencePlan& plan : plans) {
      AnnotatedSentence sent;
      sent.chars = plan.chars;
      sent.tags = encode_tags(plan.chars, plan.entities);
      // Generation-time self-check: the annotation round-trips.
      if (decode_entities(sent.chars, sent.tags) != plan.entities)
        throw std::logic_error("synth_generate: annotation round-trip failed");
      rep.findings += plan.chars;
      rep.findings.push_back(U'\x3002');
      rep.sentences.push_back(std::move(sent));
      rep.sentence_entities.push_back(std::move(plan.entities));
    }

    const ReportFeatures fx = extract_from_entities(corpus.lexicon, rep.sentence_entities);
    for (const RadFeature& f : fx.features) rep.gold_keys.push_back(f.key());

    // Generation-time self-check: planted key present iff z says so.
    for (int i = 0; i < k; ++i) {
      const bool present =
          std::find(rep.gold_keys.begin(), rep.gold_keys.end(), corpus.planted_key_names[i]) !=
          rep.gold_keys.end();
      if (present != static_cast<bool>(rep.z[i]))
        throw std::logic_error("synth_generate: planted key consistency failed");
    }
    corpus.reports.push_back(std::move(rep));
  }
  return corpus;
}

void synth_write(const SynthCorpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "words.txt", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write words.txt under " + dir);
    for (const auto& w : corpus.words) out << utf8_encode(w) << '\n';
  }
  {
    std::ofstream out(fs::path(dir) / "synonyms.tsv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write synonyms.tsv under " + dir);
    for (const auto& g : corpus.groups) {
      out << utf8_encode(g.canonical);
      for (const auto& v : g.variants)
        if (v != g.canonical) out << '\t' << utf8_encode(v);
      out << '\n';
    }
  }
  {
    std::vector<CorpusReport> docs;
    for (const auto& r : corpus.reports) docs.push_back({r.report_id, r.label, r.sentences});
    save_corpus((fs::path(dir) / "corpus.tsv").string(), docs);
  }
  {
    std::ofstream out(fs::path(dir) / "reports.tsv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write reports.tsv under " + dir);
    for (const auto& r : corpus.reports)
      out << r.report_id << '\t' << r.label << '\t' << utf8_encode(r.findings) << '\n';
  }
  {
    std::ofstream out(fs::path(dir) / "gold_features.jsonl", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write gold_features.jsonl under " + dir);
    ordered_json meta;
    meta["type"] = "meta";
    meta["seed"] = corpus.cfg.seed;
    meta["n_reports"] = corpus.cfg.n_reports;
    meta["planted_keys"] = corpus.planted_key_names;
    meta["beta"] = corpus.cfg.planted_beta;
    meta["beta0"] = corpus.beta0;
    meta["presence_prob"] = corpus.presence_prob;
    meta["label_noise"] = corpus.cfg.label_noise;
    out << meta.dump() << '\n';
    for (const auto& r : corpus.reports) {
      ordered_json j;
      j["type"] = "report";
      j["report_id"] = r.report_id;
      j["label"] = r.label;
      j["z"] = r.z;
      j["keys"] = r.gold_keys;
      out << j.dump() << '\n';
    }
  }
}

BayesGap oracle_eval(const SynthCorpus& corpus, std::span<const int> predicted_labels) {
  if (predicted_labels.size() != corpus.reports.size())
    throw std::invalid_argument("oracle_eval: prediction count does not match reports");
  std::vector<int> gold, bayes, pred(predicted_labels.begin(), predicted_labels.end());
  for (const auto& r : corpus.reports) {
    gold.push_back(r.label);
    int s = 0;
    for (uint8_t zi : r.z) s += zi;
    bayes.push_back(corpus.cfg.planted_beta * s + corpus.beta0 > 0.0 ? 1 : 0);
  }
  BayesGap gap;
  gap.bayes = binary_prf(gold, bayes);
  gap.predicted = binary_prf(gold, pred);
  gap.f1_gap = gap.predicted.f1 - gap.bayes.f1;
  return gap;
}

}  // namespace radpipe
