#ifndef DWC_SYNTHGEN_H_
#define DWC_SYNTHGEN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dwc/core.h"
#include "dwc/ingestion.h"

namespace dwc {

// Parameters of the synthetic KB and usage generator.
//
// Classes and relations are spread over latent topics. A class's relation
// affinity favours the relations of its topic plus a few of its own; each
// class pair adds an interaction vector scaled by |interaction_strength|,
// shared in part by all pairs drawn from the same two topics. An entity's
// true relation distribution is the softmax of the summed affinities and
// interactions of its classes. Period p adds p * |drift_rate| times a fixed
// Gaussian direction to every class affinity.
struct GenConfig {
  uint64_t seed = 1;
  int n_classes = 300;
  int n_relations = 150;
  int n_entities = 6000;
  // Size of the pool of distinct class sets entities draw from; 0 lets every
  // entity draw its own set.
  int n_signatures = 2000;
  int classes_per_entity_min = 1;
  int classes_per_entity_max = 4;
  int clauses_per_entity_min = 5;
  int clauses_per_entity_max = 40;
  double interaction_strength = 0.5;
  double drift_rate = 0.0;
  int n_periods = 1;

  int n_topics = 12;
  // Probability that each further class of a set comes from its first
  // class's topic.
  double topic_cohesion = 0.8;
  // Zipf exponent of signature popularity for entities beyond the first
  // n_signatures (which cover the pool once each).
  double usage_zipf = 1.0;
  double affinity_noise = 0.5;
  double topic_boost = 2.0;
  int favored_per_class = 2;
  double favored_boost = 2.0;
  double interaction_boost = 4.0;
  // Probability that the KB holds each required relation of an entity.
  double fact_coverage = 0.7;
  double fact_threshold = 0.95;
  // Keep dense ground-truth distributions (memory: signatures x relations x
  // periods).
  bool emit_truth = true;

  // Throws kConfig on invalid values.
  void Validate() const;
};

struct TruthRow {
  std::vector<ClassId> classes;
  int period = 0;
  std::vector<double> probabilities;  // indexed by relation, sums to one
};

struct SyntheticCorpus {
  std::vector<RelationId> relation_names;
  KbSnapshot kb;
  std::vector<std::vector<UsageRecord>> usage;  // one log per period
  std::vector<int64_t> drawn_clauses;            // clause draws per period
  std::vector<TruthRow> truth;  // per pool signature and period
  // Required relations deliberately left out of each entity's KB facts.
  std::map<EntityId, std::vector<RelationId>> planted_gaps;
};

SyntheticCorpus Generate(const GenConfig &cfg);

// Writes kb.ndjson, usage_p<k>.ndjson per period, gaps.ndjson and, when
// truth was kept, truth.ndjson into |dir| (which must exist).
void WriteCorpus(const SyntheticCorpus &corpus, const std::string &dir);

// Flat "key = value" listing of every field.
std::string FormatGenConfig(const GenConfig &cfg);

}  // namespace dwc

#endif  // DWC_SYNTHGEN_H_
