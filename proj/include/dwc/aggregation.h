#ifndef DWC_AGGREGATION_H_
#define DWC_AGGREGATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dwc/core.h"
#include "dwc/ingestion.h"

namespace dwc {

struct SignatureRow {
  ClassSignature signature;
  RelationCounts counts;
  RelationDistribution observed;
  int64_t usage_total = 0;
};

// One row per distinct class signature with its observed relation demand.
// Class and relation names in the vocabulary are sorted, so index order
// matches name order.
class SignatureDataset {
 public:
  SignatureDataset() = default;
  // Builds a dataset from rows keyed by names. The vocabulary is every class
  // and relation that occurs. Throws kEmptyDataset if |rows| is empty.
  struct NamedRow {
    std::vector<ClassId> classes;
    std::map<RelationId, int64_t> counts;
  };
  static SignatureDataset FromNamedRows(const std::vector<NamedRow> &rows);

  const Vocabulary &vocabulary() const { return vocab_; }
  const std::vector<SignatureRow> &rows() const { return rows_; }
  size_t size() const { return rows_.size(); }

  // Rows at |indices| with a vocabulary rebuilt from those rows only.
  SignatureDataset Subset(const std::vector<size_t> &indices) const;

  std::vector<ClassId> ClassNames(const SignatureRow &row) const;
  NamedRow ToNamed(const SignatureRow &row) const;

 private:
  Vocabulary vocab_;
  std::vector<SignatureRow> rows_;
};

struct AggregateResult {
  SignatureDataset dataset;
  int64_t skipped_records = 0;   // records whose entity is not in the KB
  int64_t skipped_clauses = 0;   // their summed counts
  int64_t dropped_signatures = 0;  // below min_support
  std::map<EntityId, int64_t> entity_usage;  // clause totals per known entity
};

// Groups entities by class signature, sums their clause counts and normalizes.
// Throws kEmptyDataset if no signature reaches |min_support|.
AggregateResult Aggregate(const std::vector<UsageRecord> &records,
                          const KbSnapshot &kb, int64_t min_support = 1);

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of;  // indexed by dataset row

  std::vector<size_t> RowsInFold(int fold) const;
  std::vector<size_t> RowsNotInFold(int fold) const;
};

// 64-bit FNV-1a over |seed| followed by |text|, with a final avalanche mix.
uint64_t StableHash(std::string_view text, uint64_t seed);

// fold = StableHash(canonical signature, seed) mod k. Throws kConfig if k < 2
// or the dataset has fewer rows than folds.
FoldAssignment AssignFolds(const SignatureDataset &ds, int k, uint64_t seed);

// Raw relation counts per class, an entity contributing to each of its
// classes. Records for entities missing from |kb| are ignored.
std::map<ClassId, std::map<RelationId, int64_t>> ClassMarginals(
    const std::vector<UsageRecord> &records, const KbSnapshot &kb);

// Dataset NDJSON: {"classes":[...],"total":N,"relations":{"r":count,...}}
void WriteDataset(const std::string &path, const SignatureDataset &ds);
SignatureDataset LoadDataset(const std::string &path);

}  // namespace dwc

#endif  // DWC_AGGREGATION_H_
