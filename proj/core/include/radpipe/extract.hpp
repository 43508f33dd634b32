#pragma once

#include <span>
#include <string>
#include <vector>

#include "radpipe/lexicon.hpp"
#include "radpipe/ner.hpp"
#include "radpipe/tagging.hpp"

namespace radpipe {

/// A Location entity with the non-Location entities that follow it up to
/// the next Location (or the end of the sentence).
struct Part {
  Entity location;
  std::vector<Entity> trailing;
};

/// Location-anchored tuple of canonical words; the stable key joins them
/// with '/'.
struct RadFeature {
  std::vector<std::u32string> words;
  std::string key() const;
};

/// Splits findings text on 。 (U+3002) and ASCII '.', dropping delimiters
/// and empty segments, keeping order.
std::vector<std::u32string> split_sentences(std::u32string_view findings);

struct PartSplit {
  std::vector<Part> parts;
  int dropped_pre_location = 0;  // non-Location entities before the first Location
};

/// Entities must be ordered by start position.
PartSplit split_parts(std::span<const Entity> entities);

struct FeatureExtraction {
  std::vector<RadFeature> features;
  int dropped_modifiers = 0;  // Modifiers with no preceding Enhancement/Density
};

/// Applies the pattern rules per part: Morphology pairs with the location;
/// each Enhancement/Density starts its own feature and collects the
/// Modifiers that follow it; all words normalized to canonicals.
/// Order: parts in order; within a part Morphology features first, then
/// Enhancement/Density features, each in text order.
FeatureExtraction extract_features(const Lexicon& lex, std::span<const Part> parts);

struct ReportFeatures {
  std::vector<RadFeature> features;  // deduplicated by key, first occurrence order
  int dropped_modifiers = 0;
  int dropped_pre_location = 0;
};

/// Feature extraction from already-known entities, one list per sentence.
ReportFeatures extract_from_entities(const Lexicon& lex,
                                     std::span<const std::vector<Entity>> sentence_entities);

/// Full pipeline for one report: split sentences, tag each with the NER
/// model, split parts, extract features, deduplicate by key.
ReportFeatures extract_report(const Lexicon& lex, const NerModel& model,
                              std::u32string_view findings);

}  // namespace radpipe
