#include "dwc/core.h"

#include <algorithm>
#include <numeric>

namespace dwc {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kEmptyUsage: return "EmptyUsage";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kUnknownSignature: return "UnknownSignature";
    case ErrorCode::kUnknownEntity: return "UnknownEntity";
    case ErrorCode::kMetric: return "MetricError";
    case ErrorCode::kDivergence: return "DivergenceError";
  }
  return "Error";
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
    case ErrorCode::kConfig:
      return 2;
    case ErrorCode::kDivergence:
      return 4;
    default:
      return 3;
  }
}

bool IsValidIdentifier(std::string_view id) {
  if (id.empty()) return false;
  for (unsigned char c : id) {
    if (c < 0x20 || c == 0x7f) return false;
  }
  return true;
}

Interner::Interner(std::vector<std::string> names) {
  for (auto &name : names) Intern(name);
}

int Interner::Intern(const std::string &name) {
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  int index = names_.size();
  names_.push_back(name);
  index_.emplace(name, index);
  return index;
}

std::optional<int> Interner::Find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

Interner BuildUnique(std::vector<std::string> names, const char *what) {
  if (names.empty()) {
    throw Error(ErrorCode::kSchema, std::string("vocabulary has no ") + what);
  }
  Interner interner;
  for (auto &name : names) {
    if (!IsValidIdentifier(name)) {
      throw Error(ErrorCode::kSchema,
                  std::string("invalid ") + what + " identifier '" + name + "'");
    }
    if (interner.Find(name)) {
      throw Error(ErrorCode::kSchema,
                  std::string("duplicate ") + what + " '" + name + "'");
    }
    interner.Intern(name);
  }
  return interner;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<ClassId> classes,
                       std::vector<RelationId> relations)
    : classes_(BuildUnique(std::move(classes), "classes")),
      relations_(BuildUnique(std::move(relations), "relations")) {}

ClassSignature ClassSignature::FromIndices(std::vector<int> indices) {
  if (indices.empty()) {
    throw Error(ErrorCode::kSchema, "class signature must not be empty");
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (indices.front() < 0) {
    throw Error(ErrorCode::kSchema, "negative class index in signature");
  }
  ClassSignature s;
  s.classes_ = std::move(indices);
  return s;
}

std::optional<ClassSignature> ClassSignature::FromNames(
    const std::vector<ClassId> &names, const Vocabulary &vocab, int *dropped) {
  std::vector<int> indices;
  int missing = 0;
  for (const auto &name : names) {
    if (auto index = vocab.FindClass(name)) {
      indices.push_back(*index);
    } else {
      ++missing;
    }
  }
  if (dropped != nullptr) *dropped = missing;
  if (indices.empty()) return std::nullopt;
  return FromIndices(std::move(indices));
}

std::string ClassSignature::CanonicalString(const Vocabulary &vocab) const {
  std::vector<std::string> names;
  names.reserve(classes_.size());
  for (int c : classes_) names.push_back(vocab.class_name(c));
  std::sort(names.begin(), names.end());
  std::string out;
  for (size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += '|';
    out += names[i];
  }
  return out;
}

size_t ClassSignatureHash::operator()(const ClassSignature &s) const {
  size_t h = 0xcbf29ce484222325ULL;
  for (int c : s.classes()) {
    h ^= static_cast<size_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

RelationDistribution RelationDistribution::FromEntries(
    std::vector<RelationEntry> entries, bool truncated) {
  std::erase_if(entries, [](const RelationEntry &e) {
    return !(e.proportion > 0.0);
  });
  std::sort(entries.begin(), entries.end(),
            [](const RelationEntry &a, const RelationEntry &b) {
              return a.relation < b.relation;
            });
  RelationDistribution d;
  d.entries_ = std::move(entries);
  d.truncated_ = truncated;
  return d;
}

double RelationDistribution::Get(int relation) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), relation,
      [](const RelationEntry &e, int r) { return e.relation < r; });
  if (it == entries_.end() || it->relation != relation) return 0.0;
  return it->proportion;
}

bool RelationDistribution::Contains(int relation) const {
  return Get(relation) > 0.0;
}

double RelationDistribution::Mass() const {
  double sum = 0.0;
  for (const auto &e : entries_) sum += e.proportion;
  return sum;
}

RelationDistribution Normalize(const RelationCounts &counts) {
  int64_t total = 0;
  for (const auto &[relation, count] : counts) {
    if (count > 0) total += count;
  }
  if (total <= 0) {
    throw Error(ErrorCode::kEmptyUsage, "cannot normalize: no positive counts");
  }
  std::vector<RelationEntry> entries;
  entries.reserve(counts.size());
  for (const auto &[relation, count] : counts) {
    if (count > 0) {
      entries.push_back({relation, static_cast<double>(count) / total});
    }
  }
  return RelationDistribution::FromEntries(std::move(entries), false);
}

RelationDistribution NormalizeDense(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) {
    if (v > 0.0) total += v;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kEmptyUsage, "cannot normalize: no positive mass");
  }
  std::vector<RelationEntry> entries;
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) {
      entries.push_back({static_cast<int>(i), values[i] / total});
    }
  }
  return RelationDistribution::FromEntries(std::move(entries), false);
}

RelationDistribution TruncateToMass(
    const RelationDistribution &d, double threshold,
    std::span<const std::string> relation_names) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "truncation threshold must be in (0, 1]");
  }
  std::vector<RelationEntry> order = d.entries();
  std::sort(order.begin(), order.end(),
            [&](const RelationEntry &a, const RelationEntry &b) {
              if (a.proportion != b.proportion) {
                return a.proportion > b.proportion;
              }
              return relation_names[a.relation] < relation_names[b.relation];
            });
  double cumulative = 0.0;
  size_t keep = 0;
  while (keep < order.size()) {
    cumulative += order[keep].proportion;
    ++keep;
    if (cumulative >= threshold - kMassEpsilon) break;
  }
  order.resize(keep);
  return RelationDistribution::FromEntries(std::move(order), true);
}

}  // namespace dwc
