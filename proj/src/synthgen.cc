#include "dwc/synthgen.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dwc {

void GenConfig::Validate() const {
  auto require = [](bool ok, const char *what) {
    if (!ok) throw Error(ErrorCode::kConfig, std::string("generator: ") + what);
  };
  require(n_classes >= 1, "n_classes must be >= 1");
  require(n_relations >= 1, "n_relations must be >= 1");
  require(n_entities >= 1, "n_entities must be >= 1");
  require(n_signatures >= 0, "n_signatures must be >= 0");
  require(classes_per_entity_min >= 1 &&
              classes_per_entity_min <= classes_per_entity_max,
          "classes_per_entity range invalid");
  require(classes_per_entity_max <= n_classes,
          "classes_per_entity_max exceeds n_classes");
  require(clauses_per_entity_min >= 1 &&
              clauses_per_entity_min <= clauses_per_entity_max,
          "clauses_per_entity range invalid");
  require(interaction_strength >= 0.0 && interaction_strength <= 1.0,
          "interaction_strength must be in [0, 1]");
  require(drift_rate >= 0.0, "drift_rate must be >= 0");
  require(n_periods >= 1, "n_periods must be >= 1");
  require(n_topics >= 1, "n_topics must be >= 1");
  require(topic_cohesion >= 0.0 && topic_cohesion <= 1.0,
          "topic_cohesion must be in [0, 1]");
  require(usage_zipf >= 0.0, "usage_zipf must be >= 0");
  require(affinity_noise >= 0.0, "affinity_noise must be >= 0");
  require(favored_per_class >= 0, "favored_per_class must be >= 0");
  require(fact_coverage >= 0.0 && fact_coverage <= 1.0,
          "fact_coverage must be in [0, 1]");
  require(fact_threshold > 0.0 && fact_threshold <= 1.0,
          "fact_threshold must be in (0, 1]");
}

namespace {

uint64_t Mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (seed, tag, a, b).
std::mt19937_64 SubStream(uint64_t seed, uint64_t tag, uint64_t a, uint64_t b = 0) {
  return std::mt19937_64(Mix(Mix(Mix(seed ^ Mix(tag)) ^ a) ^ (b * 0x632be59bd9b4e019ULL)));
}

std::string PaddedName(char prefix, int index, int count) {
  int width = std::to_string(std::max(count - 1, 0)).size();
  std::string digits = std::to_string(index);
  return std::string(1, prefix) + std::string(width - digits.size(), '0') + digits;
}

enum Tag : uint64_t {
  kTopics = 1,
  kClassAffinity,
  kClassDrift,
  kTopicPair,
  kClassPair,
  kPool,
  kEntities,
  kClauses,
  kFacts,
};

class TrueModel {
 public:
  explicit TrueModel(const GenConfig &cfg) : cfg_(cfg) {
    const int n = cfg.n_classes, m = cfg.n_relations;
    std::mt19937_64 rng = SubStream(cfg.seed, kTopics, 0);
    std::uniform_int_distribution<int> topic(0, cfg.n_topics - 1);
    class_topic_.resize(n);
    for (int c = 0; c < n; ++c) class_topic_[c] = topic(rng);
    relation_topic_.resize(m);
    for (int r = 0; r < m; ++r) relation_topic_[r] = topic(rng);
    topic_classes_.resize(cfg.n_topics);
    for (int c = 0; c < n; ++c) topic_classes_[class_topic_[c]].push_back(c);

    affinity_.assign(static_cast<size_t>(n) * m, 0.0);
    std::uniform_int_distribution<int> relation(0, m - 1);
    for (int c = 0; c < n; ++c) {
      std::mt19937_64 crng = SubStream(cfg.seed, kClassAffinity, c);
      std::normal_distribution<double> noise(0.0, 1.0);
      double *row = &affinity_[static_cast<size_t>(c) * m];
      for (int r = 0; r < m; ++r) {
        row[r] = cfg.affinity_noise * noise(crng);
        if (relation_topic_[r] == class_topic_[c]) row[r] += cfg.topic_boost;
      }
      for (int k = 0; k < cfg.favored_per_class; ++k) {
        row[relation(crng)] += cfg.favored_boost;
      }
    }
    if (cfg.drift_rate > 0.0 && cfg.n_periods > 1) {
      drift_.assign(static_cast<size_t>(n) * m, 0.0);
      for (int c = 0; c < n; ++c) {
        std::mt19937_64 crng = SubStream(cfg.seed, kClassDrift, c);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int r = 0; r < m; ++r) drift_[static_cast<size_t>(c) * m + r] = noise(crng);
      }
    }
  }

  int topic_of(int c) const { return class_topic_[c]; }
  const std::vector<int> &classes_of_topic(int t) const { return topic_classes_[t]; }

  // True distribution of a sorted class set at |period|.
  std::vector<double> Distribution(const std::vector<int> &classes, int period) const {
    const int m = cfg_.n_relations;
    std::vector<double> logits(m, 0.0);
    const double drift = cfg_.drift_rate * period;
    for (int c : classes) {
      const double *row = &affinity_[static_cast<size_t>(c) * m];
      for (int r = 0; r < m; ++r) logits[r] += row[r];
      if (drift > 0.0 && !drift_.empty()) {
        const double *z = &drift_[static_cast<size_t>(c) * m];
        for (int r = 0; r < m; ++r) logits[r] += drift * z[r];
      }
    }
    if (cfg_.interaction_strength > 0.0) {
      std::uniform_int_distribution<int> relation(0, m - 1);
      const double boost = cfg_.interaction_strength * cfg_.interaction_boost;
      for (size_t i = 0; i < classes.size(); ++i) {
        for (size_t j = i + 1; j < classes.size(); ++j) {
          int a = classes[i], b = classes[j];
          int ta = std::min(topic_of(a), topic_of(b));
          int tb = std::max(topic_of(a), topic_of(b));
          // Shared by every pair drawn from these two topics.
          std::mt19937_64 trng = SubStream(cfg_.seed, kTopicPair, ta, tb);
          for (int k = 0; k < 2; ++k) logits[relation(trng)] += boost;
          // Specific to this pair.
          std::mt19937_64 prng = SubStream(cfg_.seed, kClassPair, a, b);
          logits[relation(prng)] += 0.5 * boost;
        }
      }
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double &z : logits) {
      z = std::exp(z - max_logit);
      sum += z;
    }
    for (double &z : logits) z /= sum;
    return logits;
  }

 private:
  const GenConfig &cfg_;
  std::vector<int> class_topic_, relation_topic_;
  std::vector<std::vector<int>> topic_classes_;
  std::vector<double> affinity_;  // n x m
  std::vector<double> drift_;     // n x m, empty without drift
};

std::vector<int> DrawClassSet(const GenConfig &cfg, const TrueModel &truth,
                              std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> size(cfg.classes_per_entity_min,
                                          cfg.classes_per_entity_max);
  std::uniform_int_distribution<int> any(0, cfg.n_classes - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const int k = size(rng);
  std::set<int> classes;
  classes.insert(any(rng));
  const std::vector<int> &same_topic = truth.classes_of_topic(truth.topic_of(*classes.begin()));
  int attempts = 0;
  while (static_cast<int>(classes.size()) < k && attempts++ < 64 * k) {
    if (same_topic.size() > 1 && coin(rng) < cfg.topic_cohesion) {
      classes.insert(same_topic[std::uniform_int_distribution<size_t>(
          0, same_topic.size() - 1)(rng)]);
    } else {
      classes.insert(any(rng));
    }
  }
  return {classes.begin(), classes.end()};
}

// Multinomial sample of |clauses| draws from |p| as (relation, count) pairs.
std::map<int, int64_t> SampleClauses(const std::vector<double> &cdf, int clauses,
                                     std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<int, int64_t> counts;
  for (int i = 0; i < clauses; ++i) {
    double x = u(rng) * cdf.back();
    int r = std::upper_bound(cdf.begin(), cdf.end(), x) - cdf.begin();
    if (r >= static_cast<int>(cdf.size())) r = cdf.size() - 1;
    ++counts[r];
  }
  return counts;
}

}  // namespace

SyntheticCorpus Generate(const GenConfig &cfg) {
  cfg.Validate();
  TrueModel truth(cfg);
  SyntheticCorpus corpus;
  std::vector<std::string> class_names(cfg.n_classes);
  for (int c = 0; c < cfg.n_classes; ++c) class_names[c] = PaddedName('c', c, cfg.n_classes);
  corpus.relation_names.resize(cfg.n_relations);
  for (int r = 0; r < cfg.n_relations; ++r) {
    corpus.relation_names[r] = PaddedName('r', r, cfg.n_relations);
  }

  // Signature pool.
  std::vector<std::vector<int>> pool;
  {
    std::mt19937_64 rng = SubStream(cfg.seed, kPool, 0);
    std::set<std::vector<int>> seen;
    int attempts = 0;
    while (static_cast<int>(pool.size()) < cfg.n_signatures &&
           attempts++ < 50 * cfg.n_signatures + 1000) {
      std::vector<int> classes = DrawClassSet(cfg, truth, rng);
      if (seen.insert(classes).second) pool.push_back(std::move(classes));
    }
  }

  // Entities and their class sets.
  std::vector<std::vector<int>> entity_classes(cfg.n_entities);
  std::vector<int> entity_pool_index(cfg.n_entities, -1);
  {
    std::mt19937_64 rng = SubStream(cfg.seed, kEntities, 0);
    std::vector<double> popularity(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) {
      popularity[i] = 1.0 / std::pow(static_cast<double>(i + 1), cfg.usage_zipf);
    }
    std::discrete_distribution<size_t> pick(popularity.begin(), popularity.end());
    for (int e = 0; e < cfg.n_entities; ++e) {
      if (pool.empty()) {
        entity_classes[e] = DrawClassSet(cfg, truth, rng);
        continue;
      }
      size_t index = e < static_cast<int>(pool.size()) ? e : pick(rng);
      entity_pool_index[e] = index;
      entity_classes[e] = pool[index];
    }
  }

  std::vector<std::string> entity_names(cfg.n_entities);
  for (int e = 0; e < cfg.n_entities; ++e) entity_names[e] = PaddedName('e', e, cfg.n_entities);

  // Ground truth per distinct class set, computed once per period.
  std::map<std::vector<int>, std::vector<std::vector<double>>> cache;
  auto distribution = [&](const std::vector<int> &classes, int period)
      -> const std::vector<double> & {
    auto &slots = cache[classes];
    if (slots.empty()) slots.resize(cfg.n_periods);
    if (slots[period].empty()) slots[period] = truth.Distribution(classes, period);
    return slots[period];
  };

  corpus.usage.resize(cfg.n_periods);
  corpus.drawn_clauses.assign(cfg.n_periods, 0);
  for (int period = 0; period < cfg.n_periods; ++period) {
    std::mt19937_64 rng = SubStream(cfg.seed, kClauses, period);
    std::uniform_int_distribution<int> clauses(cfg.clauses_per_entity_min,
                                               cfg.clauses_per_entity_max);
    const std::string label = std::to_string(period);
    std::vector<double> cdf(cfg.n_relations);
    for (int e = 0; e < cfg.n_entities; ++e) {
      const std::vector<double> &p = distribution(entity_classes[e], period);
      std::partial_sum(p.begin(), p.end(), cdf.begin());
      const int drawn = clauses(rng);
      corpus.drawn_clauses[period] += drawn;
      for (const auto &[r, count] : SampleClauses(cdf, drawn, rng)) {
        corpus.usage[period].push_back(
            {entity_names[e], corpus.relation_names[r], count, label});
      }
    }
    if (!cfg.emit_truth) {
      // Release this period's distributions; they are not reported.
      for (auto &[classes, slots] : cache) {
        if (period < static_cast<int>(slots.size()) && period > 0) {
          slots[period].clear();
          slots[period].shrink_to_fit();
        }
      }
    }
  }

  // KB facts with planted gaps, from the period-0 required relations.
  {
    std::mt19937_64 rng = SubStream(cfg.seed, kFacts, 0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int e = 0; e < cfg.n_entities; ++e) {
      const std::vector<double> &p = distribution(entity_classes[e], 0);
      RelationDistribution required = TruncateToMass(
          NormalizeDense(p), cfg.fact_threshold, corpus.relation_names);
      KbEntity &entity = corpus.kb.entities[entity_names[e]];
      for (int c : entity_classes[e]) entity.classes.insert(class_names[c]);
      for (const auto &req : required.entries()) {
        const std::string &name = corpus.relation_names[req.relation];
        if (coin(rng) < cfg.fact_coverage) {
          entity.relations.insert(name);
        } else {
          corpus.planted_gaps[entity_names[e]].push_back(name);
        }
      }
    }
  }

  if (cfg.emit_truth) {
    std::vector<std::vector<int>> sets = pool;
    if (sets.empty()) {
      std::set<std::vector<int>> distinct(entity_classes.begin(), entity_classes.end());
      sets.assign(distinct.begin(), distinct.end());
    }
    for (int period = 0; period < cfg.n_periods; ++period) {
      for (const auto &classes : sets) {
        TruthRow row;
        for (int c : classes) row.classes.push_back(class_names[c]);
        row.period = period;
        row.probabilities = distribution(classes, period);
        corpus.truth.push_back(std::move(row));
      }
    }
  }
  return corpus;
}

void WriteCorpus(const SyntheticCorpus &corpus, const std::string &dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  WriteKbSnapshot((root / "kb.ndjson").string(), corpus.kb);
  for (size_t p = 0; p < corpus.usage.size(); ++p) {
    WriteUsageLog((root / ("usage_p" + std::to_string(p) + ".ndjson")).string(),
                  corpus.usage[p]);
  }
  auto open = [](const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
    return out;
  };
  if (!corpus.truth.empty()) {
    std::ofstream out = open(root / "truth.ndjson");
    for (const auto &row : corpus.truth) {
      nlohmann::ordered_json j;
      j["classes"] = row.classes;
      j["period"] = row.period;
      nlohmann::ordered_json relations = nlohmann::ordered_json::object();
      for (size_t r = 0; r < row.probabilities.size(); ++r) {
        relations[corpus.relation_names[r]] = row.probabilities[r];
      }
      j["relations"] = std::move(relations);
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out = open(root / "gaps.ndjson");
    for (const auto &[entity, missing] : corpus.planted_gaps) {
      nlohmann::ordered_json j;
      j["entity"] = entity;
      j["missing"] = missing;
      out << j.dump() << '\n';
    }
  }
}

namespace {

// Shortest text that reads back as the same double.
std::string Shortest(double value) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

}  // namespace

std::string FormatGenConfig(const GenConfig &cfg) {
  std::ostringstream out;
  out << "seed = " << cfg.seed << "\n"
      << "n_classes = " << cfg.n_classes << "\n"
      << "n_relations = " << cfg.n_relations << "\n"
      << "n_entities = " << cfg.n_entities << "\n"
      << "n_signatures = " << cfg.n_signatures << "\n"
      << "classes_per_entity_min = " << cfg.classes_per_entity_min << "\n"
      << "classes_per_entity_max = " << cfg.classes_per_entity_max << "\n"
      << "clauses_per_entity_min = " << cfg.clauses_per_entity_min << "\n"
      << "clauses_per_entity_max = " << cfg.clauses_per_entity_max << "\n"
      << "interaction_strength = " << Shortest(cfg.interaction_strength) << "\n"
      << "drift_rate = " << Shortest(cfg.drift_rate) << "\n"
      << "n_periods = " << cfg.n_periods << "\n"
      << "n_topics = " << cfg.n_topics << "\n"
      << "topic_cohesion = " << Shortest(cfg.topic_cohesion) << "\n"
      << "usage_zipf = " << Shortest(cfg.usage_zipf) << "\n"
      << "affinity_noise = " << Shortest(cfg.affinity_noise) << "\n"
      << "topic_boost = " << Shortest(cfg.topic_boost) << "\n"
      << "favored_per_class = " << cfg.favored_per_class << "\n"
      << "favored_boost = " << Shortest(cfg.favored_boost) << "\n"
      << "interaction_boost = " << Shortest(cfg.interaction_boost) << "\n"
      << "fact_coverage = " << Shortest(cfg.fact_coverage) << "\n"
      << "fact_threshold = " << Shortest(cfg.fact_threshold) << "\n"
      << "emit_truth = " << (cfg.emit_truth ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace dwc
