#include "radpipe/ner.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "radpipe/serialize.hpp"
#include "radpipe/utf8.hpp"

namespace radpipe {

NerModel::NerModel(const NerConfig& cfg, const std::vector<char32_t>& vocab_chars)
    : config(cfg),
      id_to_char(vocab_chars),
      char_embeddings("char_embeddings", static_cast<int>(vocab_chars.size()) + 2, cfg.char_emb_dim),
      segtag_embeddings("segtag_embeddings", kNumSegTags, cfg.segtag_emb_dim),
      fwd("fwd", cfg.hidden, cfg.char_emb_dim + cfg.segtag_emb_dim),
      bwd("bwd", cfg.hidden, cfg.char_emb_dim + cfg.segtag_emb_dim),
      proj_w("proj.W", 2 * cfg.hidden, BieosTag::kCount),
      proj_b("proj.b", BieosTag::kCount, 1),
      crf(BieosTag::kCount) {
  for (size_t i = 0; i < id_to_char.size(); ++i)
    char_vocab.emplace(id_to_char[i], static_cast<int>(i) + 2);

  Rng rng(derive_seed(cfg.seed, 0));
  char_embeddings.init_glorot(rng);
  if (cfg.segtag_emb_dim > 0) segtag_embeddings.init_glorot(rng);
  fwd.init(rng);
  bwd.init(rng);
  proj_w.init_glorot(rng);
  // proj_b and CRF scores start at zero.
}

int NerModel::char_id(char32_t c) const {
  const auto it = char_vocab.find(c);
  return it == char_vocab.end() ? kUnkId : it->second;
}

std::vector<Param*> NerModel::params() {
  std::vector<Param*> out{&char_embeddings};
  if (config.segtag_emb_dim > 0) out.push_back(&segtag_embeddings);
  for (Param* p : fwd.params()) out.push_back(p);
  for (Param* p : bwd.params()) out.push_back(p);
  out.push_back(&proj_w);
  out.push_back(&proj_b);
  for (Param* p : crf.params()) out.push_back(p);
  return out;
}

std::vector<Vec> embed_sentence(const NerModel& model, std::u32string_view chars,
                                std::span<const SegTag> segtags) {
  if (chars.size() != segtags.size())
    throw std::invalid_argument("embed_sentence: segtag count does not match character count");
  const int cd = model.config.char_emb_dim;
  const int sd = model.config.segtag_emb_dim;
  std::vector<Vec> out(chars.size());
  for (size_t t = 0; t < chars.size(); ++t) {
    Vec v(cd + sd);
    const double* ce = model.char_embeddings.value.row(model.char_id(chars[t]));
    std::copy(ce, ce + cd, v.begin());
    if (sd > 0) {
      const double* se = model.segtag_embeddings.value.row(static_cast<int>(segtags[t]));
      std::copy(se, se + sd, v.begin() + cd);
    }
    out[t] = std::move(v);
  }
  return out;
}

namespace {

/// Emissions for one sentence; fills caches for the backward pass.
Mat forward_emissions(const NerModel& model, const std::vector<Vec>& inputs,
                      BiLstmCache* cache, std::vector<Vec>* hidden_out) {
  const std::vector<Vec> h = bilstm_forward(model.fwd, model.bwd, inputs, cache);
  const int n = static_cast<int>(h.size());
  Mat em(n, BieosTag::kCount);
  Vec row;
  for (int t = 0; t < n; ++t) {
    matvec_t(model.proj_w.value, h[t], row);  // proj.W is 2H x T
    for (int j = 0; j < BieosTag::kCount; ++j) em(t, j) = row[j] + model.proj_b.value.a[j];
  }
  if (hidden_out) *hidden_out = h;
  return em;
}

std::vector<int> viterbi_ids(const NerModel& model, const Mat& emissions) {
  return crf_viterbi(model.crf, emissions, &bieos_mask());
}

std::vector<Entity> decode_ids(std::u32string_view chars, const std::vector<int>& ids) {
  std::vector<BieosTag> tags;
  tags.reserve(ids.size());
  for (int id : ids) tags.push_back(BieosTag::from_id(id));
  return decode_entities(chars, tags);
}

std::vector<Entity> tag_with_segtags(const NerModel& model, std::u32string_view chars,
                                     std::span<const SegTag> segtags) {
  if (chars.empty()) return {};
  const std::vector<Vec> inputs = embed_sentence(model, chars, segtags);
  const Mat em = forward_emissions(model, inputs, nullptr, nullptr);
  return decode_ids(chars, viterbi_ids(model, em));
}

void validate_gold(const std::vector<AnnotatedSentence>& corpus) {
  for (size_t s = 0; s < corpus.size(); ++s) {
    const auto& sent = corpus[s];
    if (sent.chars.size() != sent.tags.size())
      throw std::runtime_error("train_ner: sentence " + std::to_string(s) +
                               ": tag count does not match character count");
    if (sent.tags.empty()) continue;
    auto fail = [&](size_t pos, const std::string& what) {
      throw std::runtime_error("train_ner: sentence " + std::to_string(s) + ": " + what +
                               " at position " + std::to_string(pos));
    };
    if (!is_valid_start(sent.tags.front())) fail(0, "invalid start tag " + sent.tags.front().name());
    for (size_t i = 0; i + 1 < sent.tags.size(); ++i)
      if (!is_valid_transition(sent.tags[i], sent.tags[i + 1]))
        fail(i + 1, "invalid gold transition " + sent.tags[i].name() + " -> " + sent.tags[i + 1].name());
    if (!is_valid_end(sent.tags.back()))
      fail(sent.tags.size() - 1, "invalid end tag " + sent.tags.back().name());
  }
}

}  // namespace

std::pair<NerModel, NerTrainReport> train_ner(const std::vector<AnnotatedSentence>& corpus,
                                              const Lexicon& lex, const NerConfig& cfg,
                                              const std::vector<AnnotatedSentence>& dev) {
  if (corpus.empty()) throw std::invalid_argument("train_ner: empty corpus");
  if (cfg.char_emb_dim < 1 || cfg.hidden < 1 || cfg.segtag_emb_dim < 0 || cfg.batch_size < 1)
    throw std::invalid_argument("train_ner: bad config");
  validate_gold(corpus);

  // Vocabulary in first-occurrence order, min count 1.
  std::vector<char32_t> vocab_chars;
  {
    std::unordered_map<char32_t, int> seen;
    for (const auto& s : corpus)
      for (char32_t c : s.chars)
        if (seen.emplace(c, 1).second) vocab_chars.push_back(c);
  }

  NerModel model(cfg, vocab_chars);

  if (!cfg.pretrained_path.empty()) {
    const auto pre = load_pretrained_embeddings(cfg.pretrained_path);
    for (const auto& [c, row] : pre) {
      if (static_cast<int>(row.size()) != cfg.char_emb_dim)
        throw std::runtime_error("pretrained embeddings: dimension " + std::to_string(row.size()) +
                                 " does not match char_emb_dim " + std::to_string(cfg.char_emb_dim));
      const auto it = model.char_vocab.find(c);
      if (it == model.char_vocab.end()) continue;
      std::copy(row.begin(), row.end(), model.char_embeddings.value.row(it->second));
    }
  }

  // Lexicon features are fixed per sentence; compute them once.
  std::vector<std::vector<SegTag>> segtags(corpus.size());
  std::vector<std::vector<int>> gold_ids(corpus.size());
  for (size_t s = 0; s < corpus.size(); ++s) {
    segtags[s] = lex.segment_fmm(corpus[s].chars);
    gold_ids[s].reserve(corpus[s].tags.size());
    for (BieosTag t : corpus[s].tags) gold_ids[s].push_back(t.id);
  }
  std::vector<std::vector<SegTag>> dev_segtags(dev.size());
  std::vector<std::vector<Entity>> dev_gold(dev.size());
  for (size_t s = 0; s < dev.size(); ++s) {
    dev_segtags[s] = lex.segment_fmm(dev[s].chars);
    dev_gold[s] = decode_entities(dev[s].chars, dev[s].tags);
  }

  const std::vector<Param*> params = model.params();
  const AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps};
  Rng shuffle_rng(derive_seed(cfg.seed, 1));

  NerTrainReport report;
  std::vector<Mat> best_values;
  double best_f1 = -1.0;
  int since_best = 0;
  report.stop_reason = "max_epochs";

  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t done = 0;
    while (done < order.size()) {
      const size_t batch_n = std::min<size_t>(cfg.batch_size, order.size() - done);
      const double scale = 1.0 / static_cast<double>(batch_n);
      for (size_t bi = 0; bi < batch_n; ++bi) {
        const size_t s = order[done + bi];
        if (corpus[s].chars.empty()) continue;
        const std::vector<Vec> inputs = embed_sentence(model, corpus[s].chars, segtags[s]);
        BiLstmCache cache;
        std::vector<Vec> hidden;
        const Mat em = forward_emissions(model, inputs, &cache, &hidden);

        Mat d_em(em.rows, em.cols);
        epoch_loss += crf_nll(model.crf, em, gold_ids[s], &d_em, scale);

        const int n = em.rows;
        std::vector<Vec> d_hidden(n);
        Vec d_row(BieosTag::kCount);
        for (int t = 0; t < n; ++t) {
          for (int j = 0; j < BieosTag::kCount; ++j) {
            d_row[j] = d_em(t, j);
            model.proj_b.grad.a[j] += d_row[j];
          }
          add_outer(model.proj_w.grad, hidden[t], d_row);
          matvec(model.proj_w.value, d_row, d_hidden[t]);
        }
        const std::vector<Vec> d_inputs = bilstm_backward(model.fwd, model.bwd, cache, d_hidden);
        const int cd = cfg.char_emb_dim;
        for (int t = 0; t < n; ++t) {
          double* ce = model.char_embeddings.grad.row(model.char_id(corpus[s].chars[t]));
          for (int k = 0; k < cd; ++k) ce[k] += d_inputs[t][k];
          if (cfg.segtag_emb_dim > 0) {
            double* se = model.segtag_embeddings.grad.row(static_cast<int>(segtags[s][t]));
            for (int k = 0; k < cfg.segtag_emb_dim; ++k) se[k] += d_inputs[t][cd + k];
          }
        }
      }
      adam_step(params, adam);
      done += batch_n;
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(corpus.size()));

    if (!dev.empty()) {
      std::vector<std::vector<Entity>> pred(dev.size());
      for (size_t s = 0; s < dev.size(); ++s)
        pred[s] = tag_with_segtags(model, dev[s].chars, dev_segtags[s]);
      const double f1 = entity_prf(dev_gold, pred).overall.f1;
      report.dev_f1.push_back(f1);
      if (f1 > best_f1) {
        best_f1 = f1;
        report.best_epoch = epoch;
        since_best = 0;
        best_values.clear();
        for (Param* p : params) best_values.push_back(p->value);
      } else if (++since_best >= cfg.patience) {
        report.stop_reason = "patience";
        break;
      }
    }
  }

  if (!best_values.empty()) {
    auto mut = model.params();
    for (size_t i = 0; i < mut.size(); ++i) mut[i]->value = best_values[i];
  } else if (dev.empty()) {
    report.best_epoch = 0;
  }
  return {std::move(model), std::move(report)};
}

std::vector<Entity> tag_sentence(const NerModel& model, const Lexicon& lex,
                                 std::u32string_view chars) {
  if (chars.empty()) return {};
  const std::vector<SegTag> segtags = lex.segment_fmm(chars);
  return tag_with_segtags(model, chars, segtags);
}

std::unordered_map<char32_t, Vec> load_pretrained_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embeddings file: " + path);
  std::unordered_map<char32_t, Vec> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    // Optional "<count> <dim>" header: two integer tokens on the first line.
    if (lineno == 1) {
      std::string second;
      std::istringstream probe(line);
      std::string a, b, c;
      probe >> a >> b >> c;
      if (c.empty() && !b.empty() && a.find_first_not_of("0123456789") == std::string::npos &&
          b.find_first_not_of("0123456789") == std::string::npos)
        continue;
    }
    std::u32string key;
    try {
      key = utf8_decode(head);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": invalid UTF-8 token");
    }
    if (key.size() != 1)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": token must be a single character");
    Vec row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": no embedding values");
    out[key[0]] = std::move(row);
  }
  return out;
}

namespace {
constexpr const char* kNerMagic = "radpipe-ner";
constexpr const char* kNerVersion = "v1";
}  // namespace

void NerModel::save(std::ostream& os) const {
  TextWriter w(os);
  w.word(kNerMagic).word(kNerVersion).nl();
  w.word("config").nl();
  w.word("char_emb_dim").num(config.char_emb_dim).nl();
  w.word("segtag_emb_dim").num(config.segtag_emb_dim).nl();
  w.word("hidden").num(config.hidden).nl();
  w.word("lr").num(config.lr).nl();
  w.word("beta1").num(config.beta1).nl();
  w.word("beta2").num(config.beta2).nl();
  w.word("eps").num(config.eps).nl();
  w.word("epochs").num(config.epochs).nl();
  w.word("batch_size").num(config.batch_size).nl();
  w.word("patience").num(config.patience).nl();
  w.word("seed").num(config.seed).nl();
  w.word("vocab").num(static_cast<long>(id_to_char.size())).nl();
  for (char32_t c : id_to_char) w.num(static_cast<long>(c)).nl();
  w.mat("char_embeddings", char_embeddings.value);
  if (config.segtag_emb_dim > 0) w.mat("segtag_embeddings", segtag_embeddings.value);
  w.mat("fwd.W", fwd.W.value);
  w.mat("fwd.U", fwd.U.value);
  w.mat("fwd.b", fwd.b.value);
  w.mat("bwd.W", bwd.W.value);
  w.mat("bwd.U", bwd.U.value);
  w.mat("bwd.b", bwd.b.value);
  w.mat("proj.W", proj_w.value);
  w.mat("proj.b", proj_b.value);
  w.mat("crf.transitions", crf.transitions.value);
  w.mat("crf.start", crf.start.value);
  w.mat("crf.end", crf.end.value);
  w.word("end").nl();
}

void NerModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  save(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

NerModel NerModel::load(std::istream& is, const std::string& name) {
  TextReader r(is, name);
  r.expect(kNerMagic);
  r.expect(kNerVersion);
  r.expect("config");
  NerConfig cfg;
  r.expect("char_emb_dim");
  cfg.char_emb_dim = static_cast<int>(r.next_long());
  r.expect("segtag_emb_dim");
  cfg.segtag_emb_dim = static_cast<int>(r.next_long());
  r.expect("hidden");
  cfg.hidden = static_cast<int>(r.next_long());
  r.expect("lr");
  cfg.lr = r.next_double();
  r.expect("beta1");
  cfg.beta1 = r.next_double();
  r.expect("beta2");
  cfg.beta2 = r.next_double();
  r.expect("eps");
  cfg.eps = r.next_double();
  r.expect("epochs");
  cfg.epochs = static_cast<int>(r.next_long());
  r.expect("batch_size");
  cfg.batch_size = static_cast<int>(r.next_long());
  r.expect("patience");
  cfg.patience = static_cast<int>(r.next_long());
  r.expect("seed");
  cfg.seed = r.next_u64();
  r.expect("vocab");
  const long vn = r.next_long();
  std::vector<char32_t> vocab_chars(static_cast<size_t>(vn));
  for (auto& c : vocab_chars) c = static_cast<char32_t>(r.next_long());

  NerModel m(cfg, vocab_chars);
  m.char_embeddings.value = r.next_mat("char_embeddings");
  if (cfg.segtag_emb_dim > 0) m.segtag_embeddings.value = r.next_mat("segtag_embeddings");
  m.fwd.W.value = r.next_mat("fwd.W");
  m.fwd.U.value = r.next_mat("fwd.U");
  m.fwd.b.value = r.next_mat("fwd.b");
  m.bwd.W.value = r.next_mat("bwd.W");
  m.bwd.U.value = r.next_mat("bwd.U");
  m.bwd.b.value = r.next_mat("bwd.b");
  m.proj_w.value = r.next_mat("proj.W");
  m.proj_b.value = r.next_mat("proj.b");
  m.crf.transitions.value = r.next_mat("crf.transitions");
  m.crf.start.value = r.next_mat("crf.start");
  m.crf.end.value = r.next_mat("crf.end");
  r.expect("end");
  return m;
}

NerModel NerModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return load(in, path);
}

}  // namespace radpipe
