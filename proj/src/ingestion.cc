#include "dwc/ingestion.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dwc {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::ifstream OpenForRead(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream OpenForWrite(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  return out;
}

bool IsBlank(const std::string &line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string RequireIdentifier(const json &obj, const char *field) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw Error(ErrorCode::kFormat, std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::kFormat, std::string("field '") + field +
                                        "' must be a string");
  }
  std::string value = it->get<std::string>();
  if (!IsValidIdentifier(value)) {
    throw Error(ErrorCode::kFormat, std::string("field '") + field +
                                        "' is not a valid identifier");
  }
  return value;
}

std::vector<std::string> RequireIdentifierArray(const json &obj,
                                                const char *field) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) {
    throw Error(ErrorCode::kFormat,
                std::string("field '") + field + "' must be an array");
  }
  std::vector<std::string> values;
  for (const auto &v : *it) {
    if (!v.is_string() || !IsValidIdentifier(v.get_ref<const std::string &>())) {
      throw Error(ErrorCode::kFormat, std::string("field '") + field +
                                          "' must hold identifier strings");
    }
    values.push_back(v.get<std::string>());
  }
  return values;
}

}  // namespace

int64_t UsageLog::TotalCount() const {
  int64_t total = 0;
  for (const auto &r : records) total += r.count;
  return total;
}

UsageRecord ParseUsageRecord(const std::string &line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) throw Error(ErrorCode::kFormat, "invalid JSON");
  if (!obj.is_object()) throw Error(ErrorCode::kFormat, "record is not an object");
  UsageRecord record;
  record.entity = RequireIdentifier(obj, "entity");
  record.relation = RequireIdentifier(obj, "relation");
  if (auto it = obj.find("count"); it != obj.end()) {
    if (!it->is_number_integer() || it->get<int64_t>() < 1) {
      throw Error(ErrorCode::kFormat, "field 'count' must be an integer >= 1");
    }
    record.count = it->get<int64_t>();
  }
  if (auto it = obj.find("period"); it != obj.end()) {
    if (!it->is_string()) {
      throw Error(ErrorCode::kFormat, "field 'period' must be a string");
    }
    record.period = it->get<std::string>();
  }
  return record;
}

UsageLog LoadUsageLog(const std::string &path, const UsageLogOptions &options) {
  std::ifstream in = OpenForRead(path);
  UsageLog log;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    ++log.lines_read;
    try {
      log.records.push_back(ParseUsageRecord(line));
    } catch (const Error &e) {
      log.malformed.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read error on '" + path + "'");
  if (!log.malformed.empty() &&
      static_cast<double>(log.malformed.size()) >
          options.max_malformed_fraction * static_cast<double>(log.lines_read)) {
    std::ostringstream msg;
    msg << path << ": " << log.malformed.size() << " of " << log.lines_read
        << " lines malformed; lines";
    size_t shown = std::min<size_t>(log.malformed.size(), 10);
    for (size_t i = 0; i < shown; ++i) {
      msg << (i == 0 ? " " : ", ") << log.malformed[i].line << " ("
          << log.malformed[i].message << ")";
    }
    if (shown < log.malformed.size()) msg << ", ...";
    throw Error(ErrorCode::kFormat, msg.str());
  }
  return log;
}

void WriteUsageLog(const std::string &path,
                   const std::vector<UsageRecord> &records) {
  std::ofstream out = OpenForWrite(path);
  for (const auto &r : records) {
    ordered_json obj;
    obj["entity"] = r.entity;
    obj["relation"] = r.relation;
    if (r.count != 1) obj["count"] = r.count;
    if (r.period) obj["period"] = *r.period;
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write error on '" + path + "'");
}

const KbEntity *KbSnapshot::Find(const EntityId &entity) const {
  auto it = entities.find(entity);
  return it == entities.end() ? nullptr : &it->second;
}

KbSnapshot LoadKbSnapshot(const std::string &path) {
  std::ifstream in = OpenForRead(path);
  KbSnapshot kb;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    std::string entity;
    std::vector<std::string> classes, relations;
    try {
      json obj = json::parse(line, nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        throw Error(ErrorCode::kFormat, "invalid JSON object");
      }
      entity = RequireIdentifier(obj, "entity");
      classes = RequireIdentifierArray(obj, "classes");
      if (obj.contains("relations")) {
        relations = RequireIdentifierArray(obj, "relations");
      }
    } catch (const Error &e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line_no) +
                                          ": " + e.what());
    }
    if (classes.empty()) {
      throw Error(ErrorCode::kSchema, path + ":" + std::to_string(line_no) +
                                          ": entity '" + entity +
                                          "' has an empty class list");
    }
    auto [it, inserted] = kb.entities.try_emplace(entity);
    if (!inserted) {
      kb.warnings.push_back("duplicate entity '" + entity + "' at line " +
                            std::to_string(line_no) + " merged");
    }
    it->second.classes.insert(classes.begin(), classes.end());
    it->second.relations.insert(relations.begin(), relations.end());
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read error on '" + path + "'");
  return kb;
}

void WriteKbSnapshot(const std::string &path, const KbSnapshot &kb) {
  std::ofstream out = OpenForWrite(path);
  for (const auto &[entity, info] : kb.entities) {
    ordered_json obj;
    obj["entity"] = entity;
    obj["classes"] = info.classes;
    obj["relations"] = info.relations;
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write error on '" + path + "'");
}

}  // namespace dwc
