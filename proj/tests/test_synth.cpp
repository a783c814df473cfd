#include <doctest.h>

#include <cmath>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"
#include "coursemi/synth.hpp"
#include "test_util.hpp"

using namespace coursemi;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.n_courses = 60;
  c.n_students = 40;
  c.n_teachers = 10;
  c.n_subjects = 6;
  c.d = 8;
  c.p_in = 0.3;
  c.p_out = 0.02;
  return c;
}

double sq_dist(const Tensor& x, std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t c = 0; c < x.cols(); ++c) s += (x(a, c) - x(b, c)) * (x(a, c) - x(b, c));
  return s;
}

}  // namespace

TEST_CASE("node counts and labels") {
  const auto data = generate(small());
  const auto& g = data.graph;
  CHECK(g.num_courses() == 60);
  CHECK(g.count(NodeType::Student) == 40);
  CHECK(g.count(NodeType::Teacher) == 10);
  CHECK(g.count(NodeType::Subject) == 6);
  CHECK(data.features.rows() == 60);
  CHECK(data.features.cols() == 8);
  CHECK(data.labels.classes.size() == 60);
  for (const auto& [i, c] : data.labels.classes) {
    CHECK(c == data.course_class[i]);
    CHECK(c >= 0);
    CHECK(c < 3);
  }
  CHECK(g.node(g.course_id(0)).external_id == "c0");
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate(small());
  const auto b = generate(small());
  CHECK(a.features == b.features);
  CHECK(a.course_class == b.course_class);
  CHECK(a.graph.num_edges() == b.graph.num_edges());
  auto c = small();
  c.seed = 1;
  CHECK(generate(c).features != a.features);
}

TEST_CASE("zero feature noise gives identical rows within a class") {
  auto c = small();
  c.sigma_f = 0;
  const auto data = generate(c);
  for (std::size_t i = 0; i < 60; ++i) {
    const auto proto = class_prototype(data.course_class[i], 8);
    for (std::size_t k = 0; k < 8; ++k) CHECK(data.features(i, k) == proto[k]);
  }
}

TEST_CASE("prototypes are distinct ±1 rows") {
  for (std::size_t a = 0; a < 6; ++a) {
    const auto pa = class_prototype(a, 16);
    for (const double v : pa) CHECK(std::abs(v) == 1.0);
    for (std::size_t b = a + 1; b < 6; ++b) {
      const auto pb = class_prototype(b, 16);
      double dot = 0;
      for (std::size_t k = 0; k < 16; ++k) dot += pa[k] * pb[k];
      CHECK(dot == 0.0);
    }
  }
}

TEST_CASE("within-class feature distance is below between-class distance") {
  const auto data = generate(small());
  double within = 0, between = 0;
  std::size_t nw = 0, nb = 0;
  for (std::size_t a = 0; a < 60; ++a) {
    for (std::size_t b = a + 1; b < 60; ++b) {
      if (data.course_class[a] == data.course_class[b]) {
        within += sq_dist(data.features, a, b);
        ++nw;
      } else {
        between += sq_dist(data.features, a, b);
        ++nb;
      }
    }
  }
  CHECK(within / nw < between / nb);
}

TEST_CASE("planted views link same-class courses more often") {
  auto c = small();
  const auto data = generate(c);
  for (const auto& mp : MetaPath::all()) {
    const auto a = project(data.graph, mp);
    double same = 0, diff = 0;
    std::size_t ns = 0, nd = 0;
    for (std::size_t i = 0; i < 60; ++i) {
      for (std::size_t j = i + 1; j < 60; ++j) {
        (data.course_class[i] == data.course_class[j] ? same : diff) += a(i, j) > 0;
        ++(data.course_class[i] == data.course_class[j] ? ns : nd);
      }
    }
    CHECK(same / ns > diff / nd);
  }
}

TEST_CASE("noise views use the density-matched rate") {
  auto c = small();
  c = make_noise_view_config(c, MetaPath::mp2());
  CHECK(c.noise_students);
  CHECK(!c.noise_teachers);
  CHECK(!c.noise_subjects);
  c.n_students = 400;
  const auto data = generate(c);
  std::size_t clicks = 0;
  for (const auto& e : data.graph.edges()) clicks += e.type == EdgeType::Click;
  const double p_flat = (0.3 + 2 * 0.02) / 3;
  const double expect = p_flat * 400 * 60;
  CHECK(std::abs(clicks - expect) < 4 * std::sqrt(expect));
}

TEST_CASE("validation") {
  auto c = small();
  c.n_classes = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small();
  c.p_in = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small();
  c.n_courses = 0;
  CHECK_THROWS_AS(generate(c), ConfigError);
}

TEST_CASE("written files load back") {
  TempDir d;
  const auto data = generate(small());
  write_synth(data, small(), d.path().string());
  const auto g = load_hin(d.file("nodes.tsv"), d.file("edges.tsv"));
  CHECK(g.num_nodes() == data.graph.num_nodes());
  CHECK(g.num_edges() == data.graph.num_edges());
  CHECK(max_abs_diff(load_features(d.file("features.tsv"), g), data.features) == 0.0);
  CHECK(load_labels(d.file("labels.tsv"), g).classes == data.labels.classes);
  CHECK(io::read_file(d.file("synth_manifest")).starts_with("# coursemi synth"));
}
