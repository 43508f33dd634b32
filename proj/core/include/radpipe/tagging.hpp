#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace radpipe {

enum class EntityType : uint8_t {
  Location = 0,
  Morphology = 1,
  Density = 2,
  Enhancement = 3,
  Modifier = 4,
};

inline constexpr int kNumEntityTypes = 5;

const char* to_string(EntityType t);
std::optional<EntityType> entity_type_from_string(std::string_view s);

/// BIEOS tag over the five entity types. Ids are stable: O = 0, then
/// 1 + 4*type + prefix with prefix order B, I, E, S — 21 tags total.
struct BieosTag {
  static constexpr int kCount = 4 * kNumEntityTypes + 1;

  uint8_t id = 0;

  constexpr BieosTag() = default;
  constexpr explicit BieosTag(int tag_id) : id(static_cast<uint8_t>(tag_id)) {}

  static constexpr BieosTag outside() { return BieosTag(0); }
  static BieosTag make(char prefix, EntityType t);
  static BieosTag from_id(int id);
  /// Parses "O", "B-Location", "S-Modifier", ... Throws on anything else.
  static BieosTag parse(std::string_view name);

  bool is_outside() const { return id == 0; }
  char prefix() const;               // 'O', 'B', 'I', 'E' or 'S'
  EntityType etype() const;          // only valid when !is_outside()
  std::string name() const;

  friend bool operator==(BieosTag a, BieosTag b) { return a.id == b.id; }
  friend bool operator!=(BieosTag a, BieosTag b) { return a.id != b.id; }
};

/// May tag `b` follow tag `a`? After O, E-x or S-x anything that opens
/// (O, B-y, S-y) is allowed; after B-x or I-x only I-x or E-x.
bool is_valid_transition(BieosTag a, BieosTag b);
/// May a sequence start with `t`? (O, B-y, S-y)
bool is_valid_start(BieosTag t);
/// May a sequence end with `t`? (O, E-x, S-x)
bool is_valid_end(BieosTag t);

struct Entity {
  EntityType etype = EntityType::Location;
  int start = 0;  // char index, inclusive
  int end = 0;    // char index, exclusive
  std::u32string surface;

  friend bool operator==(const Entity& a, const Entity& b) {
    return a.etype == b.etype && a.start == b.start && a.end == b.end;
  }
};

struct AnnotatedSentence {
  std::u32string chars;
  std::vector<BieosTag> tags;
};

/// Left-to-right span decoding with the conservative repair policy: a
/// B/I run not closed by a matching E is dropped, an I or E with no open
/// run starts nothing. Never fabricates spans, never throws on any tag
/// combination (only on length mismatch).
std::vector<Entity> decode_entities(std::u32string_view chars, std::span<const BieosTag> tags);

/// Inverse of decode_entities on valid input: length-1 entity -> S-type,
/// longer -> B, I*, E. Throws on overlapping or out-of-range entities.
std::vector<BieosTag> encode_tags(std::u32string_view chars, std::span<const Entity> entities);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Prf prf_from_counts(long tp, long fp, long fn);

struct EntityPrfReport {
  Prf overall;
  long tp = 0, fp = 0, fn = 0;
  std::array<Prf, kNumEntityTypes> by_type;
  std::array<long, kNumEntityTypes> type_tp{}, type_fp{}, type_fn{};
};

/// Entity-level scores with exact (etype, start, end) matching, plus the
/// per-type breakdown. Throws if the sentence counts differ.
EntityPrfReport entity_prf(std::span<const std::vector<Entity>> gold,
                           std::span<const std::vector<Entity>> pred);

}  // namespace radpipe
