#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "coursemi/tensor.hpp"

namespace coursemi {

// Integer codes are part of the on-disk and checkpoint formats.
enum class NodeType : std::uint8_t { Student = 0, Teacher = 1, Course = 2, Subject = 3 };
enum class EdgeType : std::uint8_t { Click = 0, Upload = 1, Include = 2 };

inline constexpr std::size_t kNumNodeTypes = 4;

std::string_view to_string(NodeType t);
std::string_view to_string(EdgeType t);
std::optional<NodeType> parse_node_type(std::string_view s);
std::optional<EdgeType> parse_edge_type(std::string_view s);

// The non-course endpoint type an edge type requires (its other end is always a course).
NodeType partner_type(EdgeType t);

using NodeId = std::uint32_t;

struct Node {
  NodeType type;
  std::string external_id;
};

// Canonical orientation: src is the non-course endpoint, dst is the course.
struct Edge {
  NodeId src;
  NodeId dst;
  EdgeType type;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct TypeRange {
  NodeId begin = 0;
  NodeId end = 0;
  std::size_t size() const { return end - begin; }
};

// Typed heterogeneous network. Node ids are dense and grouped by type
// (students, teachers, courses, subjects), each group in insertion order,
// so every type owns a contiguous id range and a course's local index is
// its offset inside the course range.
class HinGraph {
 public:
  class Builder;

  HinGraph() = default;

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t count(NodeType t) const { return range(t).size(); }
  std::size_t num_courses() const { return count(NodeType::Course); }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  TypeRange range(NodeType t) const { return ranges_[static_cast<std::size_t>(t)]; }

  // Offset of `id` inside its type's range.
  std::size_t local_index(NodeId id) const { return id - range(nodes_.at(id).type).begin; }
  NodeId course_id(std::size_t local) const;

  std::optional<NodeId> find(std::string_view external_id) const;

  // Number of incident edges per node.
  std::vector<std::size_t> degrees() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::array<TypeRange, kNumNodeTypes> ranges_{};
  std::unordered_map<std::string, NodeId> by_external_;
};

// Collects nodes and edges by external id and validates them into a HinGraph.
class HinGraph::Builder {
 public:
  // Throws SchemaError on a repeated external id.
  Builder& add_node(std::string external_id, NodeType type);
  // Endpoints may be given in either order. Throws SchemaError on unknown
  // endpoints, on an endpoint pair that does not match the edge type, and on
  // duplicates.
  Builder& add_edge(std::string_view a, std::string_view b, EdgeType type);

  HinGraph build() &&;

 private:
  struct PendingEdge {
    std::size_t src;
    std::size_t dst;
    EdgeType type;
  };
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<PendingEdge> edges_;
  std::set<std::tuple<std::size_t, std::size_t, EdgeType>> seen_;
};

// Course quality classes keyed by course local index.
struct CourseLabels {
  std::map<std::size_t, int> classes;

  static constexpr int kNumClasses = 6;
  // Rounds a raw score in [0, 5] to its class; throws SchemaError outside the range.
  static int class_from_score(double score);
};

// Course features, one row per course local index.
using FeatureMatrix = Tensor;

// One pass: drops students (and teachers, if requested) with fewer than
// `min_links` incident edges together with those edges. Other types are kept.
HinGraph degree_filter(const HinGraph& g, std::size_t min_links, bool include_teachers = false);

HinGraph load_hin(const std::string& nodes_path, const std::string& edges_path);
void save_hin(const HinGraph& g, const std::string& nodes_path, const std::string& edges_path);

CourseLabels load_labels(const std::string& path, const HinGraph& g);
void save_labels(const CourseLabels& labels, const HinGraph& g, const std::string& path);

// Reads `d` features per course. Throws SchemaError naming missing or extra
// course ids, on a wrong row width, and on non-finite values.
FeatureMatrix load_features(const std::string& path, const HinGraph& g, std::size_t d);
// Width taken from the header.
FeatureMatrix load_features(const std::string& path, const HinGraph& g);
void save_features(const FeatureMatrix& x, const HinGraph& g, const std::string& path);

// `course_id e0 ... e{k-1}` embedding dumps; width taken from the header.
Tensor load_embeddings(const std::string& path, const HinGraph& g);
void save_embeddings(const Tensor& h, const HinGraph& g, const std::string& path);

}  // namespace coursemi
