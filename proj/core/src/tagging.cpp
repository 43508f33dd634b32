#include "radpipe/tagging.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "radpipe/utf8.hpp"

namespace radpipe {

const char* to_string(EntityType t) {
  switch (t) {
    case EntityType::Location: return "Location";
    case EntityType::Morphology: return "Morphology";
    case EntityType::Density: return "Density";
    case EntityType::Enhancement: return "Enhancement";
    case EntityType::Modifier: return "Modifier";
  }
  return "?";
}

std::optional<EntityType> entity_type_from_string(std::string_view s) {
  for (int i = 0; i < kNumEntityTypes; ++i) {
    const auto t = static_cast<EntityType>(i);
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

namespace {
constexpr char kPrefixes[4] = {'B', 'I', 'E', 'S'};

int prefix_index(char p) {
  switch (p) {
    case 'B': return 0;
    case 'I': return 1;
    case 'E': return 2;
    case 'S': return 3;
  }
  throw std::invalid_argument("bad BIEOS prefix");
}
}  // namespace

BieosTag BieosTag::make(char prefix, EntityType t) {
  return BieosTag(1 + 4 * static_cast<int>(t) + prefix_index(prefix));
}

BieosTag BieosTag::from_id(int id) {
  if (id < 0 || id >= kCount) throw std::invalid_argument("BieosTag id out of range");
  return BieosTag(id);
}

BieosTag BieosTag::parse(std::string_view name) {
  if (name == "O") return outside();
  if (name.size() >= 3 && name[1] == '-') {
    const auto t = entity_type_from_string(name.substr(2));
    if (t && (name[0] == 'B' || name[0] == 'I' || name[0] == 'E' || name[0] == 'S'))
      return make(name[0], *t);
  }
  throw std::runtime_error("bad tag name '" + std::string(name) + "'");
}

char BieosTag::prefix() const {
  if (id == 0) return 'O';
  return kPrefixes[(id - 1) % 4];
}

EntityType BieosTag::etype() const {
  if (id == 0) throw std::logic_error("O tag carries no entity type");
  return static_cast<EntityType>((id - 1) / 4);
}

std::string BieosTag::name() const {
  if (id == 0) return "O";
  return std::string(1, prefix()) + "-" + to_string(etype());
}

bool is_valid_start(BieosTag t) {
  const char p = t.prefix();
  return p == 'O' || p == 'B' || p == 'S';
}

bool is_valid_end(BieosTag t) {
  const char p = t.prefix();
  return p == 'O' || p == 'E' || p == 'S';
}

bool is_valid_transition(BieosTag a, BieosTag b) {
  const char pa = a.prefix();
  if (pa == 'O' || pa == 'E' || pa == 'S') return is_valid_start(b);
  // After B-x or I-x the entity must continue with the same type.
  const char pb = b.prefix();
  return (pb == 'I' || pb == 'E') && b.etype() == a.etype();
}

std::vector<Entity> decode_entities(std::u32string_view chars, std::span<const BieosTag> tags) {
  if (chars.size() != tags.size())
    throw std::invalid_argument("decode_entities: tag count does not match character count");
  std::vector<Entity> out;
  int open_start = -1;
  EntityType open_type = EntityType::Location;
  for (size_t i = 0; i < tags.size(); ++i) {
    const BieosTag t = tags[i];
    const char p = t.prefix();
    if (open_start >= 0) {
      if (p == 'I' && t.etype() == open_type) continue;
      if (p == 'E' && t.etype() == open_type) {
        const int s = open_start;
        const int e = static_cast<int>(i) + 1;
        out.push_back({open_type, s, e, std::u32string(chars.substr(s, e - s))});
        open_start = -1;
        continue;
      }
      open_start = -1;  // run not closed by E: dropped
    }
    if (p == 'B') {
      open_start = static_cast<int>(i);
      open_type = t.etype();
    } else if (p == 'S') {
      out.push_back({t.etype(), static_cast<int>(i), static_cast<int>(i) + 1,
                     std::u32string(chars.substr(i, 1))});
    }
    // O, or I/E with no open run: nothing starts
  }
  return out;
}

std::vector<BieosTag> encode_tags(std::u32string_view chars, std::span<const Entity> entities) {
  const int n = static_cast<int>(chars.size());
  std::vector<BieosTag> tags(chars.size(), BieosTag::outside());
  std::vector<bool> covered(chars.size(), false);
  for (const Entity& e : entities) {
    if (e.start < 0 || e.end > n || e.start >= e.end)
      throw std::invalid_argument("encode_tags: entity span out of range");
    for (int i = e.start; i < e.end; ++i) {
      if (covered[i]) throw std::invalid_argument("encode_tags: overlapping entities");
      covered[i] = true;
    }
    if (e.end - e.start == 1) {
      tags[e.start] = BieosTag::make('S', e.etype);
    } else {
      tags[e.start] = BieosTag::make('B', e.etype);
      for (int i = e.start + 1; i < e.end - 1; ++i) tags[i] = BieosTag::make('I', e.etype);
      tags[e.end - 1] = BieosTag::make('E', e.etype);
    }
  }
  return tags;
}

Prf prf_from_counts(long tp, long fp, long fn) {
  Prf r;
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

EntityPrfReport entity_prf(std::span<const std::vector<Entity>> gold,
                           std::span<const std::vector<Entity>> pred) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("entity_prf: sentence counts differ");
  EntityPrfReport rep;
  for (size_t s = 0; s < gold.size(); ++s) {
    // Multiset match on (etype, start, end).
    std::map<std::tuple<int, int, int>, long> bag;
    for (const Entity& e : gold[s]) ++bag[{static_cast<int>(e.etype), e.start, e.end}];
    for (const Entity& e : pred[s]) {
      const auto key = std::tuple<int, int, int>{static_cast<int>(e.etype), e.start, e.end};
      auto it = bag.find(key);
      const int t = static_cast<int>(e.etype);
      if (it != bag.end() && it->second > 0) {
        --it->second;
        ++rep.tp;
        ++rep.type_tp[t];
      } else {
        ++rep.fp;
        ++rep.type_fp[t];
      }
    }
    for (const auto& [key, left] : bag) {
      if (left > 0) {
        rep.fn += left;
        rep.type_fn[std::get<0>(key)] += left;
      }
    }
  }
  rep.overall = prf_from_counts(rep.tp, rep.fp, rep.fn);
  for (int t = 0; t < kNumEntityTypes; ++t)
    rep.by_type[t] = prf_from_counts(rep.type_tp[t], rep.type_fp[t], rep.type_fn[t]);
  return rep;
}

}  // namespace radpipe
