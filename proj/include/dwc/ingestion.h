#ifndef DWC_INGESTION_H_
#define DWC_INGESTION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dwc/core.h"

namespace dwc {

// One attributed query clause (or |count| identical clauses) about an entity.
struct UsageRecord {
  EntityId entity;
  RelationId relation;
  int64_t count = 1;
  std::optional<std::string> period;

  bool operator==(const UsageRecord &) const = default;
};

struct MalformedLine {
  int64_t line;  // 1-based
  std::string message;
};

struct UsageLog {
  std::vector<UsageRecord> records;
  std::vector<MalformedLine> malformed;
  int64_t lines_read = 0;  // non-blank lines

  int64_t TotalCount() const;
};

struct UsageLogOptions {
  // Fraction of non-blank lines that may be malformed before the load fails.
  double max_malformed_fraction = 0.01;
};

// Reads newline-delimited JSON usage records:
//   {"entity": str, "relation": str, "count": int >= 1?, "period": str?}
// Blank lines are ignored. Throws kIo if the file cannot be read, kFormat if
// the malformed fraction exceeds the limit.
UsageLog LoadUsageLog(const std::string &path,
                      const UsageLogOptions &options = {});

// Parses a single record line; throws kFormat describing the problem.
UsageRecord ParseUsageRecord(const std::string &line);

void WriteUsageLog(const std::string &path,
                   const std::vector<UsageRecord> &records);

struct KbEntity {
  std::set<ClassId> classes;
  std::set<RelationId> relations;

  bool operator==(const KbEntity &) const = default;
};

struct KbSnapshot {
  std::map<EntityId, KbEntity> entities;
  std::vector<std::string> warnings;

  const KbEntity *Find(const EntityId &entity) const;
  bool operator==(const KbSnapshot &other) const {
    return entities == other.entities;
  }
};

// Reads newline-delimited JSON entity records:
//   {"entity": str, "classes": [str, ...], "relations": [str, ...]}
// Duplicate entities are merged by set union and noted in |warnings|.
// Throws kIo, kFormat for unparseable lines, kSchema for an entity without
// classes.
KbSnapshot LoadKbSnapshot(const std::string &path);

void WriteKbSnapshot(const std::string &path, const KbSnapshot &kb);

}  // namespace dwc

#endif  // DWC_INGESTION_H_
