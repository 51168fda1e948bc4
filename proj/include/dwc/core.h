#ifndef DWC_CORE_H_
#define DWC_CORE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dwc/errors.h"

namespace dwc {

using ClassId = std::string;
using RelationId = std::string;
using EntityId = std::string;

// Identifiers must be non-empty and free of control characters.
bool IsValidIdentifier(std::string_view id);

// Dense, insertion-ordered string interner.
class Interner {
 public:
  Interner() = default;
  explicit Interner(std::vector<std::string> names);

  // Returns the index of |name|, adding it if absent.
  int Intern(const std::string &name);
  std::optional<int> Find(std::string_view name) const;
  const std::string &name(int index) const { return names_[index]; }
  const std::vector<std::string> &names() const { return names_; }
  int size() const { return static_cast<int>(names_.size()); }

 private:
  struct Hash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>()(s);
    }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, int, Hash, std::equal_to<>> index_;
};

// The class (input) and relation (output) spaces of a dataset or model.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws kSchema on duplicates, invalid ids or an empty side.
  Vocabulary(std::vector<ClassId> classes, std::vector<RelationId> relations);

  int num_classes() const { return classes_.size(); }
  int num_relations() const { return relations_.size(); }
  const Interner &classes() const { return classes_; }
  const Interner &relations() const { return relations_; }
  const std::string &class_name(int i) const { return classes_.name(i); }
  const std::string &relation_name(int i) const { return relations_.name(i); }
  std::optional<int> FindClass(std::string_view id) const {
    return classes_.Find(id);
  }
  std::optional<int> FindRelation(std::string_view id) const {
    return relations_.Find(id);
  }

  bool operator==(const Vocabulary &other) const {
    return classes_.names() == other.classes_.names() &&
           relations_.names() == other.relations_.names();
  }

 private:
  Interner classes_;
  Interner relations_;
};

// Sorted, duplicate-free, non-empty set of class indices.
class ClassSignature {
 public:
  ClassSignature() = default;

  // Sorts and de-duplicates; throws kSchema if |indices| is empty or negative.
  static ClassSignature FromIndices(std::vector<int> indices);

  // Maps class names through |vocab|, dropping unknown classes. The result may
  // be empty, in which case std::nullopt is returned.
  static std::optional<ClassSignature> FromNames(
      const std::vector<ClassId> &names, const Vocabulary &vocab,
      int *dropped = nullptr);

  const std::vector<int> &classes() const { return classes_; }
  size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }

  // Sorted class names joined by '|'; independent of vocabulary order.
  std::string CanonicalString(const Vocabulary &vocab) const;

  auto operator<=>(const ClassSignature &) const = default;

 private:
  std::vector<int> classes_;
};

struct ClassSignatureHash {
  size_t operator()(const ClassSignature &s) const;
};

// Raw clause counts keyed by relation index.
using RelationCounts = std::map<int, int64_t>;

struct RelationEntry {
  int relation;
  double proportion;
  bool operator==(const RelationEntry &) const = default;
};

// Sparse distribution over relation indices. Zero-mass relations are absent.
// Untruncated distributions sum to one; truncated ones keep the original
// proportions of the retained relations.
class RelationDistribution {
 public:
  RelationDistribution() = default;

  // Entries need not be sorted. Non-positive proportions are dropped.
  static RelationDistribution FromEntries(std::vector<RelationEntry> entries,
                                          bool truncated);

  const std::vector<RelationEntry> &entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool truncated() const { return truncated_; }

  // Proportion for |relation|, zero if absent.
  double Get(int relation) const;
  bool Contains(int relation) const;
  double Mass() const;

  bool operator==(const RelationDistribution &) const = default;

 private:
  std::vector<RelationEntry> entries_;  // sorted by relation
  bool truncated_ = false;
};

// count / total for every relation with a positive count.
// Throws kEmptyUsage if no count is positive.
RelationDistribution Normalize(const RelationCounts &counts);

// Normalizes the positive components of a dense vector. Throws kEmptyUsage if
// none is positive.
RelationDistribution NormalizeDense(std::span<const double> values);

// Keeps the smallest prefix, by descending proportion with ties broken by
// ascending relation name, whose cumulative mass reaches |threshold|.
// |relation_names| must cover every relation index in |d|.
RelationDistribution TruncateToMass(
    const RelationDistribution &d, double threshold,
    std::span<const std::string> relation_names);

// Slack allowed when comparing cumulative sums against the threshold.
inline constexpr double kMassEpsilon = 1e-12;

struct UsageCounts {
  RelationCounts counts;
  int64_t total = 0;

  void Add(int relation, int64_t count) {
    counts[relation] += count;
    total += count;
  }
};

// Clause counts per signature, and optionally per entity.
struct UsageAggregate {
  std::map<ClassSignature, UsageCounts> per_signature;
  std::map<EntityId, UsageCounts> per_entity;
};

}  // namespace dwc

#endif  // DWC_CORE_H_
