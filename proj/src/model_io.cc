#include <fstream>
#include <sstream>

#include "dwc/models.h"
#include "json.hpp"

namespace dwc {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json MatrixToJson(const std::vector<double> &flat, int rows, int cols) {
  ordered_json out = ordered_json::array();
  for (int r = 0; r < rows; ++r) {
    out.push_back(std::vector<double>(flat.begin() + static_cast<size_t>(r) * cols,
                                      flat.begin() + static_cast<size_t>(r + 1) * cols));
  }
  return out;
}

std::vector<double> MatrixFromJson(const ordered_json &j, int rows, int cols,
                                   const char *name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw Error(ErrorCode::kFormat, std::string("matrix '") + name +
                                        "' has the wrong number of rows");
  }
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(rows) * cols);
  for (const auto &row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw Error(ErrorCode::kFormat, std::string("matrix '") + name +
                                          "' has the wrong number of columns");
    }
    for (const auto &v : row) flat.push_back(v.get<double>());
  }
  return flat;
}

std::vector<double> VectorFromJson(const ordered_json &j, int size,
                                   const char *name) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    throw Error(ErrorCode::kFormat, std::string("vector '") + name +
                                        "' has the wrong length");
  }
  return j.get<std::vector<double>>();
}

ordered_json ParamsToJson(const PredictorModel &model) {
  ordered_json params;
  switch (model.kind()) {
    case ModelKind::kFrequency: {
      const auto &freq = static_cast<const FrequencyModel &>(model);
      params["combine"] =
          freq.combine() == FrequencyCombine::kSumCounts ? "sum" : "mean";
      params["fallback"] = freq.fallback();
      // One array of [relation index, count] pairs per class.
      ordered_json counts = ordered_json::array();
      for (const auto &per_class : freq.class_counts()) {
        ordered_json pairs = ordered_json::array();
        for (const auto &[relation, count] : per_class) {
          pairs.push_back({relation, count});
        }
        counts.push_back(std::move(pairs));
      }
      params["class_counts"] = std::move(counts);
      break;
    }
    case ModelKind::kRegression: {
      const auto &regr = static_cast<const RegressionModel &>(model);
      const Eigen::MatrixXd &w = regr.weights();
      params["l2"] = regr.l2();
      ordered_json rows = ordered_json::array();
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        std::vector<double> row(w.cols());
        for (Eigen::Index c = 0; c < w.cols(); ++c) row[c] = w(r, c);
        rows.push_back(std::move(row));
      }
      params["weights"] = std::move(rows);
      break;
    }
    case ModelKind::kNeural: {
      const NeuralParams &p = static_cast<const NeuralModel &>(model).params();
      params["hidden"] = p.hidden;
      params["w1"] = MatrixToJson(p.w1, p.hidden, p.inputs);
      params["b1"] = p.b1;
      params["w2"] = MatrixToJson(p.w2, p.outputs, p.hidden);
      params["b2"] = p.b2;
      break;
    }
  }
  return params;
}

}  // namespace

std::string SerializeModel(const PredictorModel &model) {
  ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = ModelKindName(model.kind());
  doc["classes"] = model.vocabulary().classes().names();
  doc["relations"] = model.vocabulary().relations().names();
  doc["params"] = ParamsToJson(model);
  return doc.dump() + "\n";
}

std::unique_ptr<PredictorModel> DeserializeModel(const std::string &text) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kFormat, "model file is not a valid JSON document");
  }
  try {
    if (!doc.contains("format_version") ||
        !doc["format_version"].is_number_integer()) {
      throw Error(ErrorCode::kFormat, "model file lacks 'format_version'");
    }
    int version = doc["format_version"].get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kFormat,
                  "unsupported model format_version " + std::to_string(version) +
                      " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");
    }
    ModelKind kind = ParseModelKind(doc.at("kind").get<std::string>());
    Vocabulary vocab(doc.at("classes").get<std::vector<std::string>>(),
                     doc.at("relations").get<std::vector<std::string>>());
    const ordered_json &params = doc.at("params");
    const int n = vocab.num_classes(), m = vocab.num_relations();
    switch (kind) {
      case ModelKind::kFrequency: {
        const auto &counts_json = params.at("class_counts");
        if (!counts_json.is_array() || static_cast<int>(counts_json.size()) != n) {
          throw Error(ErrorCode::kFormat, "class_counts does not match classes");
        }
        std::vector<RelationCounts> counts(n);
        for (int c = 0; c < n; ++c) {
          for (const auto &pair : counts_json[c]) {
            int relation = pair.at(0).get<int>();
            if (relation < 0 || relation >= m) {
              throw Error(ErrorCode::kFormat, "relation index out of range");
            }
            counts[c][relation] = pair.at(1).get<int64_t>();
          }
        }
        std::string combine = params.at("combine").get<std::string>();
        if (combine != "sum" && combine != "mean") {
          throw Error(ErrorCode::kFormat, "unknown combine mode '" + combine + "'");
        }
        return std::make_unique<FrequencyModel>(
            std::move(vocab), std::move(counts),
            combine == "sum" ? FrequencyCombine::kSumCounts
                             : FrequencyCombine::kMeanNormalized,
            params.at("fallback").get<bool>());
      }
      case ModelKind::kRegression: {
        std::vector<double> flat = MatrixFromJson(params.at("weights"), n, m, "weights");
        Eigen::MatrixXd w(n, m);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < m; ++c) w(r, c) = flat[static_cast<size_t>(r) * m + c];
        }
        return std::make_unique<RegressionModel>(std::move(vocab), std::move(w),
                                                 params.at("l2").get<double>());
      }
      case ModelKind::kNeural: {
        int h = params.at("hidden").get<int>();
        if (h < 1) throw Error(ErrorCode::kFormat, "hidden width must be >= 1");
        NeuralParams p(n, h, m);
        p.w1 = MatrixFromJson(params.at("w1"), h, n, "w1");
        p.b1 = VectorFromJson(params.at("b1"), h, "b1");
        p.w2 = MatrixFromJson(params.at("w2"), m, h, "w2");
        p.b2 = VectorFromJson(params.at("b2"), m, "b2");
        return std::make_unique<NeuralModel>(std::move(vocab), std::move(p));
      }
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kFormat, std::string("malformed model file: ") + e.what());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kFormat) throw;
    throw Error(ErrorCode::kFormat, std::string("malformed model file: ") + e.what());
  }
  throw Error(ErrorCode::kFormat, "unknown model kind");
}

void SaveModel(const PredictorModel &model, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << SerializeModel(model);
  if (!out) throw Error(ErrorCode::kIo, "write error on '" + path + "'");
}

std::unique_ptr<PredictorModel> LoadModel(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return DeserializeModel(buffer.str());
}

}  // namespace dwc
