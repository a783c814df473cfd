#pragma once

#include <string>
#include <vector>

#include "coursemi/hin.hpp"
#include "coursemi/tensor.hpp"

namespace coursemi {

// Course → intermediate → course path. Only these length-2 symmetric
// shapes are supported.
struct MetaPath {
  NodeType intermediate = NodeType::Teacher;
  std::string label;

  static MetaPath mp1() { return {NodeType::Teacher, "MP1"}; }
  static MetaPath mp2() { return {NodeType::Student, "MP2"}; }
  static MetaPath mp3() { return {NodeType::Subject, "MP3"}; }
  static std::vector<MetaPath> all() { return {mp1(), mp2(), mp3()}; }

  // Accepts MP1/MP2/MP3 (case-insensitive) or teacher/student/subject.
  static MetaPath parse(const std::string& s);
  // Comma-separated list, e.g. "MP1,MP3".
  static std::vector<MetaPath> parse_list(const std::string& s);

  friend bool operator==(const MetaPath&, const MetaPath&) = default;
};

EdgeType relation_of(const MetaPath& mp);

// One meta-path view: course×course adjacency and its normalized form.
struct ViewGraph {
  MetaPath metapath;
  Tensor adjacency;
  Tensor normalized;
  // Upper-triangle edges (i < j) with nonzero adjacency.
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  // Fills the normalized form and edge list from `adjacency`.
  static ViewGraph from_adjacency(MetaPath mp, Tensor adjacency);

  std::size_t num_courses() const { return adjacency.rows(); }
};

struct ProjectionOptions {
  // Store shared-neighbour counts instead of 0/1 indicators.
  bool weighted = false;
};

// A[i][j] = 1 iff i != j and courses i, j share a neighbour of the
// meta-path's intermediate type. Built by walking each intermediate node's
// course list (the sparse product R·Rᵀ with the diagonal cleared).
Tensor project(const HinGraph& g, const MetaPath& mp, const ProjectionOptions& opts = {});

// D̃^{-1/2} (A + I) D̃^{-1/2} with D̃ the row sums of A + I.
Tensor normalize(const Tensor& adjacency);

// project + normalize per meta-path, order preserved. Throws ConfigError on
// duplicate labels.
std::vector<ViewGraph> project_all(const HinGraph& g, const std::vector<MetaPath>& mps,
                                   const ProjectionOptions& opts = {});

// Writes `<dir>/<label>.tsv` with one `i<TAB>j` line per upper-triangle edge.
void dump_adjacency(const std::vector<ViewGraph>& views, const std::string& dir);

}  // namespace coursemi
