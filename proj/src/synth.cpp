#include "coursemi/synth.hpp"

#include <bit>
#include <cmath>
#include <filesystem>
#include <random>

#include "coursemi/encoder.hpp"
#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

void SynthConfig::validate() const {
  if (n_courses == 0 || n_students == 0 || n_teachers == 0 || n_subjects == 0 || d == 0) {
    throw ConfigError("synthetic counts and d must be >= 1");
  }
  if (n_classes == 0 || n_classes > static_cast<std::size_t>(CourseLabels::kNumClasses)) {
    throw ConfigError("n_classes must be in [1, 6]");
  }
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_in) || !prob(p_out)) throw ConfigError("p_in and p_out must be in [0, 1]");
  if (p_in < p_out) throw ConfigError("p_in must be >= p_out");
  if (!(sigma_f >= 0.0) || !std::isfinite(sigma_f)) throw ConfigError("sigma_f must be >= 0");
  if (!std::isfinite(feature_signal)) throw ConfigError("feature_signal must be finite");
}

std::string SynthConfig::echo() const {
  const auto b = [](bool v) { return v ? "true" : "false"; };
  std::string o;
  o += "n_courses = " + std::to_string(n_courses) + '\n';
  o += "n_students = " + std::to_string(n_students) + '\n';
  o += "n_teachers = " + std::to_string(n_teachers) + '\n';
  o += "n_subjects = " + std::to_string(n_subjects) + '\n';
  o += "n_classes = " + std::to_string(n_classes) + '\n';
  o += "d = " + std::to_string(d) + '\n';
  o += "p_in = " + io::format_double(p_in) + '\n';
  o += "p_out = " + io::format_double(p_out) + '\n';
  o += "sigma_f = " + io::format_double(sigma_f) + '\n';
  o += "feature_signal = " + io::format_double(feature_signal) + '\n';
  o += "seed = " + std::to_string(seed) + '\n';
  o += std::string("noise_students = ") + b(noise_students) + '\n';
  o += std::string("noise_teachers = ") + b(noise_teachers) + '\n';
  o += std::string("noise_subjects = ") + b(noise_subjects) + '\n';
  return o;
}

std::vector<double> class_prototype(std::size_t c, std::size_t d) {
  // H[r][j] = (-1)^popcount(r & j). Rows are mutually orthogonal over any
  // power-of-two prefix covering r; row 0 (all ones) is skipped.
  const std::size_t r = c + 1;
  std::vector<double> p(d);
  for (std::size_t j = 0; j < d; ++j) p[j] = std::popcount(r & j) % 2 ? -1.0 : 1.0;
  return p;
}

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto nc = cfg.n_classes;
  std::uniform_int_distribution<std::size_t> pick_class(0, nc - 1);

  SynthData out;
  out.course_class.resize(cfg.n_courses);
  for (auto& c : out.course_class) c = static_cast<int>(pick_class(rng));

  HinGraph::Builder b;
  const auto cid = [](std::size_t i) { return "c" + std::to_string(i); };
  for (std::size_t i = 0; i < cfg.n_courses; ++i) b.add_node(cid(i), NodeType::Course);

  const double p_flat = (cfg.p_in + static_cast<double>(nc - 1) * cfg.p_out) / static_cast<double>(nc);
  const auto affiliate = [&](const char* prefix, std::size_t count, NodeType type, EdgeType rel,
                             bool noise) {
    std::vector<std::size_t> home(count);
    for (auto& h : home) h = pick_class(rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t k = 0; k < count; ++k) {
      const std::string id = prefix + std::to_string(k);
      b.add_node(id, type);
      for (std::size_t i = 0; i < cfg.n_courses; ++i) {
        const bool same = static_cast<std::size_t>(out.course_class[i]) == home[k];
        const double p = noise ? p_flat : (same ? cfg.p_in : cfg.p_out);
        if (u(rng) < p) b.add_edge(id, cid(i), rel);
      }
    }
  };
  affiliate("s", cfg.n_students, NodeType::Student, EdgeType::Click, cfg.noise_students);
  affiliate("t", cfg.n_teachers, NodeType::Teacher, EdgeType::Upload, cfg.noise_teachers);
  affiliate("j", cfg.n_subjects, NodeType::Subject, EdgeType::Include, cfg.noise_subjects);
  out.graph = std::move(b).build();

  out.features = Tensor(cfg.n_courses, cfg.d);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> protos;
  for (std::size_t c = 0; c < nc; ++c) protos.push_back(class_prototype(c, cfg.d));
  for (std::size_t i = 0; i < cfg.n_courses; ++i) {
    const auto& p = protos[static_cast<std::size_t>(out.course_class[i])];
    for (std::size_t j = 0; j < cfg.d; ++j) {
      const double eps = cfg.sigma_f > 0.0 ? cfg.sigma_f * noise(rng) : 0.0;
      out.features(i, j) = cfg.feature_signal * p[j] + eps;
    }
  }
  for (std::size_t i = 0; i < cfg.n_courses; ++i) out.labels.classes[i] = out.course_class[i];
  return out;
}

SynthConfig make_noise_view_config(SynthConfig cfg, const MetaPath& view) {
  switch (view.intermediate) {
    case NodeType::Student: cfg.noise_students = true; break;
    case NodeType::Teacher: cfg.noise_teachers = true; break;
    case NodeType::Subject: cfg.noise_subjects = true; break;
    case NodeType::Course: throw ConfigError("meta-path intermediate cannot be a course");
  }
  return cfg;
}

void write_synth(const SynthData& data, const SynthConfig& cfg, const std::string& dir) {
  const std::filesystem::path base(dir);
  save_hin(data.graph, (base / "nodes.tsv").string(), (base / "edges.tsv").string());
  save_features(data.features, data.graph, (base / "features.tsv").string());
  save_labels(data.labels, data.graph, (base / "labels.tsv").string());
  io::write_atomic((base / "synth_manifest").string(), "# coursemi synth\n" + cfg.echo());
}

}  // namespace coursemi
