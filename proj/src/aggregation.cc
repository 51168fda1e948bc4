#include "dwc/aggregation.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include "json.hpp"

namespace dwc {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

SignatureDataset SignatureDataset::FromNamedRows(
    const std::vector<NamedRow> &rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no rows");

  // Merge rows that share a class set.
  std::map<std::vector<ClassId>, std::map<RelationId, int64_t>> merged;
  for (const auto &row : rows) {
    std::vector<ClassId> key(row.classes);
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    if (key.empty()) {
      throw Error(ErrorCode::kSchema, "dataset row with an empty class set");
    }
    auto &counts = merged[key];
    for (const auto &[relation, count] : row.counts) {
      if (count < 0) throw Error(ErrorCode::kSchema, "negative relation count");
      if (count > 0) counts[relation] += count;
    }
  }

  std::set<ClassId> classes;
  std::set<RelationId> relations;
  for (const auto &[key, counts] : merged) {
    if (counts.empty()) {
      throw Error(ErrorCode::kSchema, "dataset row without positive counts");
    }
    classes.insert(key.begin(), key.end());
    for (const auto &[relation, count] : counts) relations.insert(relation);
  }

  SignatureDataset ds;
  ds.vocab_ = Vocabulary({classes.begin(), classes.end()},
                         {relations.begin(), relations.end()});
  ds.rows_.reserve(merged.size());
  for (const auto &[key, counts] : merged) {
    SignatureRow row;
    std::vector<int> indices;
    for (const auto &c : key) indices.push_back(*ds.vocab_.FindClass(c));
    row.signature = ClassSignature::FromIndices(std::move(indices));
    for (const auto &[relation, count] : counts) {
      row.counts[*ds.vocab_.FindRelation(relation)] = count;
      row.usage_total += count;
    }
    row.observed = Normalize(row.counts);
    ds.rows_.push_back(std::move(row));
  }
  // Names are sorted, so sorting by index vector is a name-order sort.
  std::sort(ds.rows_.begin(), ds.rows_.end(),
            [](const SignatureRow &a, const SignatureRow &b) {
              return a.signature < b.signature;
            });
  return ds;
}

std::vector<ClassId> SignatureDataset::ClassNames(const SignatureRow &row) const {
  std::vector<ClassId> names;
  names.reserve(row.signature.size());
  for (int c : row.signature.classes()) names.push_back(vocab_.class_name(c));
  return names;
}

SignatureDataset::NamedRow SignatureDataset::ToNamed(
    const SignatureRow &row) const {
  NamedRow named;
  named.classes = ClassNames(row);
  for (const auto &[relation, count] : row.counts) {
    named.counts[vocab_.relation_name(relation)] = count;
  }
  return named;
}

SignatureDataset SignatureDataset::Subset(
    const std::vector<size_t> &indices) const {
  std::vector<NamedRow> named;
  named.reserve(indices.size());
  for (size_t i : indices) named.push_back(ToNamed(rows_.at(i)));
  return FromNamedRows(named);
}

AggregateResult Aggregate(const std::vector<UsageRecord> &records,
                          const KbSnapshot &kb, int64_t min_support) {
  AggregateResult result;
  // Per-entity signature key, resolved lazily.
  std::unordered_map<EntityId, const std::set<ClassId> *> entity_classes;
  std::map<std::set<ClassId>, std::map<RelationId, int64_t>> per_signature;
  std::map<const std::set<ClassId> *, std::map<RelationId, int64_t> *> slot;

  for (const auto &record : records) {
    const KbEntity *entity = kb.Find(record.entity);
    if (entity == nullptr) {
      ++result.skipped_records;
      result.skipped_clauses += record.count;
      continue;
    }
    auto it = slot.find(&entity->classes);
    if (it == slot.end()) {
      it = slot.emplace(&entity->classes, &per_signature[entity->classes]).first;
    }
    (*it->second)[record.relation] += record.count;
    result.entity_usage[record.entity] += record.count;
  }

  std::vector<SignatureDataset::NamedRow> rows;
  for (auto &[classes, counts] : per_signature) {
    int64_t total = 0;
    for (const auto &[relation, count] : counts) total += count;
    if (total < min_support) {
      ++result.dropped_signatures;
      continue;
    }
    rows.push_back({{classes.begin(), classes.end()}, std::move(counts)});
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyDataset,
                "no class signature reached the minimum support of " +
                    std::to_string(min_support) + " (" +
                    std::to_string(result.skipped_records) +
                    " records referenced unknown entities)");
  }
  result.dataset = SignatureDataset::FromNamedRows(rows);
  return result;
}

std::vector<size_t> FoldAssignment::RowsInFold(int fold) const {
  std::vector<size_t> rows;
  for (size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<size_t> FoldAssignment::RowsNotInFold(int fold) const {
  std::vector<size_t> rows;
  for (size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) rows.push_back(i);
  }
  return rows;
}

uint64_t StableHash(std::string_view text, uint64_t seed) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
  for (unsigned char c : text) mix(c);
  // splitmix64 finalizer
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

FoldAssignment AssignFolds(const SignatureDataset &ds, int k, uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kConfig, "number of folds must be >= 2");
  if (ds.size() < static_cast<size_t>(k)) {
    throw Error(ErrorCode::kConfig,
                "dataset has " + std::to_string(ds.size()) +
                    " signatures, fewer than " + std::to_string(k) + " folds");
  }
  FoldAssignment folds;
  folds.k = k;
  folds.fold_of.reserve(ds.size());
  for (const auto &row : ds.rows()) {
    uint64_t h = StableHash(row.signature.CanonicalString(ds.vocabulary()), seed);
    folds.fold_of.push_back(static_cast<int>(h % static_cast<uint64_t>(k)));
  }
  return folds;
}

std::map<ClassId, std::map<RelationId, int64_t>> ClassMarginals(
    const std::vector<UsageRecord> &records, const KbSnapshot &kb) {
  std::map<ClassId, std::map<RelationId, int64_t>> marginals;
  for (const auto &record : records) {
    const KbEntity *entity = kb.Find(record.entity);
    if (entity == nullptr) continue;
    for (const auto &c : entity->classes) {
      marginals[c][record.relation] += record.count;
    }
  }
  return marginals;
}

void WriteDataset(const std::string &path, const SignatureDataset &ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  for (const auto &row : ds.rows()) {
    ordered_json obj;
    obj["classes"] = ds.ClassNames(row);
    obj["total"] = row.usage_total;
    ordered_json relations = ordered_json::object();
    for (const auto &[relation, count] : row.counts) {
      relations[ds.vocabulary().relation_name(relation)] = count;
    }
    obj["relations"] = std::move(relations);
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write error on '" + path + "'");
}

SignatureDataset LoadDataset(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::vector<SignatureDataset::NamedRow> rows;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string &why) {
      return Error(ErrorCode::kFormat,
                   path + ":" + std::to_string(line_no) + ": " + why);
    };
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw fail("invalid JSON object");
    if (!obj.contains("classes") || !obj["classes"].is_array() ||
        !obj.contains("relations") || !obj["relations"].is_object()) {
      throw fail("expected 'classes' array and 'relations' object");
    }
    SignatureDataset::NamedRow row;
    int64_t total = 0;
    try {
      row.classes = obj["classes"].get<std::vector<std::string>>();
      for (const auto &[relation, count] : obj["relations"].items()) {
        if (!count.is_number_integer() || count.get<int64_t>() < 1) {
          throw fail("relation counts must be positive integers");
        }
        row.counts[relation] = count.get<int64_t>();
        total += count.get<int64_t>();
      }
    } catch (const json::exception &e) {
      throw fail(e.what());
    }
    if (obj.contains("total") &&
        (!obj["total"].is_number_integer() || obj["total"].get<int64_t>() != total)) {
      throw fail("'total' does not match the sum of relation counts");
    }
    rows.push_back(std::move(row));
  }
  return SignatureDataset::FromNamedRows(rows);
}

}  // namespace dwc
