#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coursemi/hin.hpp"
#include "coursemi/metapath.hpp"

namespace coursemi {

// Planted-partition HIN: every course gets a quality class, every
// student/teacher/subject a home class, and an intermediate links a course
// with probability p_in when the classes match and p_out otherwise.
struct SynthConfig {
  std::size_t n_courses = 300;
  std::size_t n_students = 200;
  std::size_t n_teachers = 30;
  std::size_t n_subjects = 9;
  std::size_t n_classes = 3;
  std::size_t d = 16;
  double p_in = 0.15;
  double p_out = 0.01;
  double sigma_f = 0.5;
  // Multiplier on the ±1 class prototypes; 0 leaves only noise in the features.
  double feature_signal = 1.0;
  std::uint64_t seed = 0;
  // Intermediate types whose links ignore classes (rate (p_in + (C-1) p_out) / C).
  bool noise_students = false;
  bool noise_teachers = false;
  bool noise_subjects = false;

  // Throws ConfigError on zero counts, more than 6 classes, probabilities
  // outside [0, 1], p_in < p_out, or negative noise.
  void validate() const;
  // `key = value` lines.
  std::string echo() const;
};

struct SynthData {
  HinGraph graph;
  FeatureMatrix features;
  CourseLabels labels;
  std::vector<int> course_class;
};

SynthData generate(const SynthConfig& cfg);

// Copy of `cfg` where `view`'s intermediate nodes link courses uniformly at
// the density-matched rate, so that view carries no class signal.
SynthConfig make_noise_view_config(SynthConfig cfg, const MetaPath& view);

// Prototype for class `c` (0-based): row c+1 of a Sylvester Hadamard matrix,
// first `d` entries.
std::vector<double> class_prototype(std::size_t c, std::size_t d);

// nodes.tsv, edges.tsv, features.tsv, labels.tsv and synth_manifest under `dir`.
void write_synth(const SynthData& data, const SynthConfig& cfg, const std::string& dir);

}  // namespace coursemi
