#include "radpipe/extract.hpp"

#include <stdexcept>
#include <unordered_set>

#include "radpipe/utf8.hpp"

namespace radpipe {

std::string RadFeature::key() const {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += '/';
    out += utf8_encode(words[i]);
  }
  return out;
}

std::vector<std::u32string> split_sentences(std::u32string_view findings) {
  std::vector<std::u32string> out;
  std::u32string current;
  for (char32_t c : findings) {
    if (c == U'\x3002' || c == U'.') {
      if (!current.empty()) out.push_back(std::move(current));
      current = {};
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

PartSplit split_parts(std::span<const Entity> entities) {
  PartSplit out;
  for (const Entity& e : entities) {
    if (e.etype == EntityType::Location) {
      out.parts.push_back({e, {}});
    } else if (out.parts.empty()) {
      ++out.dropped_pre_location;  // no pattern starts without a Location
    } else {
      out.parts.back().trailing.push_back(e);
    }
  }
  return out;
}

FeatureExtraction extract_features(const Lexicon& lex, std::span<const Part> parts) {
  FeatureExtraction out;
  for (const Part& part : parts) {
    if (part.location.etype != EntityType::Location)
      throw std::invalid_argument("extract_features: part anchor is not a Location entity");
    const std::u32string loc = lex.normalize(part.location.surface);

    std::vector<RadFeature> morph;
    std::vector<RadFeature> enh_dens;
    int open = -1;  // index into enh_dens of the nearest preceding Enhancement/Density
    for (const Entity& e : part.trailing) {
      const std::u32string word = lex.normalize(e.surface);
      switch (e.etype) {
        case EntityType::Morphology:
          morph.push_back({{loc, word}});
          break;
        case EntityType::Enhancement:
        case EntityType::Density:
          enh_dens.push_back({{loc, word}});
          open = static_cast<int>(enh_dens.size()) - 1;
          break;
        case EntityType::Modifier:
          if (open >= 0)
            enh_dens[open].words.push_back(word);
          else
            ++out.dropped_modifiers;
          break;
        case EntityType::Location:
          throw std::invalid_argument("extract_features: Location entity in part trailing");
      }
    }
    for (auto& f : morph) out.features.push_back(std::move(f));
    for (auto& f : enh_dens) out.features.push_back(std::move(f));
  }
  return out;
}

ReportFeatures extract_from_entities(const Lexicon& lex,
                                     std::span<const std::vector<Entity>> sentence_entities) {
  ReportFeatures out;
  std::unordered_set<std::string> seen;
  for (const auto& entities : sentence_entities) {
    const PartSplit ps = split_parts(entities);
    out.dropped_pre_location += ps.dropped_pre_location;
    FeatureExtraction fx = extract_features(lex, ps.parts);
    out.dropped_modifiers += fx.dropped_modifiers;
    for (auto& f : fx.features)
      if (seen.insert(f.key()).second) out.features.push_back(std::move(f));
  }
  return out;
}

ReportFeatures extract_report(const Lexicon& lex, const NerModel& model,
                              std::u32string_view findings) {
  std::vector<std::vector<Entity>> per_sentence;
  for (const std::u32string& sent : split_sentences(findings))
    per_sentence.push_back(tag_sentence(model, lex, sent));
  return extract_from_entities(lex, per_sentence);
}

}  // namespace radpipe
