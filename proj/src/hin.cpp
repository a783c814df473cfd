#include "coursemi/hin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

namespace {

constexpr std::array<std::string_view, kNumNodeTypes> kNodeNames{"student", "teacher", "course",
                                                                 "subject"};
constexpr std::array<std::string_view, 3> kEdgeNames{"click", "upload", "include"};

std::size_t code(NodeType t) { return static_cast<std::size_t>(t); }

}  // namespace

std::string_view to_string(NodeType t) { return kNodeNames.at(code(t)); }
std::string_view to_string(EdgeType t) { return kEdgeNames.at(static_cast<std::size_t>(t)); }

std::optional<NodeType> parse_node_type(std::string_view s) {
  for (std::size_t i = 0; i < kNodeNames.size(); ++i) {
    if (kNodeNames[i] == s) return static_cast<NodeType>(i);
  }
  return std::nullopt;
}

std::optional<EdgeType> parse_edge_type(std::string_view s) {
  for (std::size_t i = 0; i < kEdgeNames.size(); ++i) {
    if (kEdgeNames[i] == s) return static_cast<EdgeType>(i);
  }
  return std::nullopt;
}

NodeType partner_type(EdgeType t) {
  switch (t) {
    case EdgeType::Click: return NodeType::Student;
    case EdgeType::Upload: return NodeType::Teacher;
    case EdgeType::Include: return NodeType::Subject;
  }
  throw SchemaError("unknown edge type");
}

NodeId HinGraph::course_id(std::size_t local) const {
  const auto r = range(NodeType::Course);
  if (local >= r.size()) throw ShapeError("course index " + std::to_string(local) + " out of range");
  return r.begin + static_cast<NodeId>(local);
}

std::optional<NodeId> HinGraph::find(std::string_view external_id) const {
  const auto it = by_external_.find(std::string(external_id));
  if (it == by_external_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> HinGraph::degrees() const {
  std::vector<std::size_t> deg(nodes_.size(), 0);
  for (const auto& e : edges_) {
    ++deg[e.src];
    ++deg[e.dst];
  }
  return deg;
}

HinGraph::Builder& HinGraph::Builder::add_node(std::string external_id, NodeType type) {
  if (external_id.empty()) throw SchemaError("empty node id");
  const auto [it, inserted] = index_.emplace(external_id, nodes_.size());
  if (!inserted) throw SchemaError("duplicate node id '" + external_id + "'");
  nodes_.push_back({type, std::move(external_id)});
  return *this;
}

HinGraph::Builder& HinGraph::Builder::add_edge(std::string_view a, std::string_view b,
                                               EdgeType type) {
  const auto describe = [&] {
    return "edge (" + std::string(a) + ", " + std::string(b) + ", " + std::string(to_string(type)) +
           ")";
  };
  const auto ia = index_.find(std::string(a));
  const auto ib = index_.find(std::string(b));
  if (ia == index_.end() || ib == index_.end()) {
    throw SchemaError(describe() + " references an unknown node");
  }
  std::size_t src = ia->second;
  std::size_t dst = ib->second;
  if (nodes_[src].type == NodeType::Course) std::swap(src, dst);
  if (nodes_[dst].type != NodeType::Course || nodes_[src].type != partner_type(type)) {
    throw SchemaError(describe() + " must join " + std::string(to_string(partner_type(type))) +
                      " and course");
  }
  if (!seen_.emplace(src, dst, type).second) throw SchemaError("duplicate " + describe());
  edges_.push_back({src, dst, type});
  return *this;
}

HinGraph HinGraph::Builder::build() && {
  HinGraph g;
  std::vector<NodeId> remap(nodes_.size());
  std::array<std::vector<std::size_t>, kNumNodeTypes> by_type;
  for (std::size_t i = 0; i < nodes_.size(); ++i) by_type[code(nodes_[i].type)].push_back(i);

  g.nodes_.reserve(nodes_.size());
  for (std::size_t t = 0; t < kNumNodeTypes; ++t) {
    g.ranges_[t].begin = static_cast<NodeId>(g.nodes_.size());
    for (const auto old : by_type[t]) {
      remap[old] = static_cast<NodeId>(g.nodes_.size());
      g.by_external_.emplace(nodes_[old].external_id, remap[old]);
      g.nodes_.push_back(std::move(nodes_[old]));
    }
    g.ranges_[t].end = static_cast<NodeId>(g.nodes_.size());
  }
  g.edges_.reserve(edges_.size());
  for (const auto& e : edges_) g.edges_.push_back({remap[e.src], remap[e.dst], e.type});
  return g;
}

int CourseLabels::class_from_score(double score) {
  if (!std::isfinite(score) || score < 0.0 || score > 5.0) {
    std::ostringstream msg;
    msg << "score " << score << " outside [0, 5]";
    throw SchemaError(msg.str());
  }
  return static_cast<int>(std::lround(score));
}

HinGraph degree_filter(const HinGraph& g, std::size_t min_links, bool include_teachers) {
  if (min_links == 0) throw ConfigError("min_links must be >= 1");
  const auto deg = g.degrees();
  std::vector<bool> drop(g.num_nodes(), false);
  for (NodeId id = 0; id < g.num_nodes(); ++id) {
    const auto t = g.node(id).type;
    const bool filtered = t == NodeType::Student || (include_teachers && t == NodeType::Teacher);
    drop[id] = filtered && deg[id] < min_links;
  }
  HinGraph::Builder b;
  for (NodeId id = 0; id < g.num_nodes(); ++id) {
    if (!drop[id]) b.add_node(g.node(id).external_id, g.node(id).type);
  }
  for (const auto& e : g.edges()) {
    if (drop[e.src] || drop[e.dst]) continue;
    b.add_edge(g.node(e.src).external_id, g.node(e.dst).external_id, e.type);
  }
  return std::move(b).build();
}

HinGraph load_hin(const std::string& nodes_path, const std::string& edges_path) {
  HinGraph::Builder b;
  io::read_tsv(nodes_path, {"id", "type"}, [&](std::size_t line, const auto& f) {
    if (f.size() != 2) throw ParseError(nodes_path, line, "expected 2 fields");
    const auto type = parse_node_type(f[1]);
    if (!type) throw ParseError(nodes_path, line, "unknown node type '" + std::string(f[1]) + "'");
    if (f[0].empty()) throw ParseError(nodes_path, line, "empty node id");
    try {
      b.add_node(std::string(f[0]), *type);
    } catch (const SchemaError& e) {
      throw SchemaError(nodes_path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  io::read_tsv(edges_path, {"src", "dst", "type"}, [&](std::size_t line, const auto& f) {
    if (f.size() != 3) throw ParseError(edges_path, line, "expected 3 fields");
    const auto type = parse_edge_type(f[2]);
    if (!type) throw ParseError(edges_path, line, "unknown edge type '" + std::string(f[2]) + "'");
    try {
      b.add_edge(f[0], f[1], *type);
    } catch (const SchemaError& e) {
      throw SchemaError(edges_path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return std::move(b).build();
}

void save_hin(const HinGraph& g, const std::string& nodes_path, const std::string& edges_path) {
  std::string nodes = "id\ttype\n";
  for (const auto& n : g.nodes()) {
    nodes += n.external_id;
    nodes += '\t';
    nodes += to_string(n.type);
    nodes += '\n';
  }
  std::string edges = "src\tdst\ttype\n";
  for (const auto& e : g.edges()) {
    edges += g.node(e.src).external_id;
    edges += '\t';
    edges += g.node(e.dst).external_id;
    edges += '\t';
    edges += to_string(e.type);
    edges += '\n';
  }
  io::write_atomic(nodes_path, nodes);
  io::write_atomic(edges_path, edges);
}

namespace {

std::size_t course_local_or_throw(const HinGraph& g, std::string_view id, const std::string& path,
                                  std::size_t line) {
  const auto node = g.find(id);
  if (!node) {
    throw SchemaError(path + ":" + std::to_string(line) + ": unknown course '" + std::string(id) +
                      "'");
  }
  if (g.node(*node).type != NodeType::Course) {
    throw SchemaError(path + ":" + std::to_string(line) + ": '" + std::string(id) +
                      "' is not a course");
  }
  return g.local_index(*node);
}

}  // namespace

CourseLabels load_labels(const std::string& path, const HinGraph& g) {
  CourseLabels labels;
  io::read_tsv(path, {"course_id", "score"}, [&](std::size_t line, const auto& f) {
    if (f.size() != 2) throw ParseError(path, line, "expected 2 fields");
    double score = 0;
    if (!io::parse_double(f[1], score)) {
      throw ParseError(path, line, "bad score '" + std::string(f[1]) + "'");
    }
    const auto local = course_local_or_throw(g, f[0], path, line);
    int cls = 0;
    try {
      cls = CourseLabels::class_from_score(score);
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    if (!labels.classes.emplace(local, cls).second) {
      throw SchemaError(path + ":" + std::to_string(line) + ": duplicate label for '" +
                        std::string(f[0]) + "'");
    }
  });
  return labels;
}

void save_labels(const CourseLabels& labels, const HinGraph& g, const std::string& path) {
  std::string out = "course_id\tscore\n";
  for (const auto& [local, cls] : labels.classes) {
    out += g.node(g.course_id(local)).external_id;
    out += '\t';
    out += std::to_string(cls);
    out += '\n';
  }
  io::write_atomic(path, out);
}

namespace {

FeatureMatrix load_course_matrix(const std::string& path, const HinGraph& g, std::size_t d,
                                 char prefix) {
  if (d == 0) throw ConfigError("feature dimension must be positive");
  std::vector<std::string> header{"course_id"};
  for (std::size_t i = 0; i < d; ++i) header.push_back(prefix + std::to_string(i));

  const auto n = g.num_courses();
  FeatureMatrix x(n, d);
  std::vector<bool> filled(n, false);
  std::vector<std::string> extra;
  io::read_tsv(path, header, [&](std::size_t line, const auto& f) {
    if (f.size() != d + 1) {
      throw SchemaError(path + ":" + std::to_string(line) + ": expected " + std::to_string(d) +
                        " features, got " + std::to_string(f.size() - 1));
    }
    const auto node = g.find(f[0]);
    if (!node || g.node(*node).type != NodeType::Course) {
      extra.emplace_back(f[0]);
      return;
    }
    const auto local = g.local_index(*node);
    if (filled[local]) {
      throw SchemaError(path + ":" + std::to_string(line) + ": duplicate row for '" +
                        std::string(f[0]) + "'");
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0;
      if (!io::parse_double(f[j + 1], v)) {
        throw ParseError(path, line, "bad value '" + std::string(f[j + 1]) + "'");
      }
      if (!std::isfinite(v)) throw SchemaError(path + ":" + std::to_string(line) + ": non-finite value");
      x(local, j) = v;
    }
    filled[local] = true;
  });

  std::vector<std::string> missing;
  for (std::size_t i = 0; i < n; ++i) {
    if (!filled[i]) missing.push_back(g.node(g.course_id(i)).external_id);
  }
  if (!missing.empty() || !extra.empty()) {
    const auto join = [](const std::vector<std::string>& ids) {
      std::string s;
      for (std::size_t i = 0; i < ids.size() && i < 10; ++i) s += (i ? "," : "") + ids[i];
      if (ids.size() > 10) s += ",...";
      return s;
    };
    std::string msg = path + ": rows do not match courses;";
    if (!missing.empty()) msg += " missing [" + join(missing) + "]";
    if (!extra.empty()) msg += " extra [" + join(extra) + "]";
    throw SchemaError(msg);
  }
  return x;
}

void save_course_matrix(const FeatureMatrix& x, const HinGraph& g, const std::string& path,
                        char prefix) {
  if (x.rows() != g.num_courses()) throw ShapeError("matrix rows != number of courses");
  std::string out = "course_id";
  for (std::size_t j = 0; j < x.cols(); ++j) {
    out += '\t';
    out += prefix + std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out += g.node(g.course_id(i)).external_id;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      out += '\t';
      out += io::format_double(x(i, j));
    }
    out += '\n';
  }
  io::write_atomic(path, out);
}

// Column count from a `course_id<TAB>p0<TAB>p1...` header.
std::size_t header_width(const std::string& path, char prefix) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = io::split(line, '\t');
  bool ok = header.size() >= 2 && header[0] == "course_id";
  for (std::size_t i = 1; ok && i < header.size(); ++i) ok = header[i] == prefix + std::to_string(i - 1);
  if (!ok) throw ParseError(path, 1, std::string("expected header 'course_id<TAB>") + prefix + "0...'");
  return header.size() - 1;
}

}  // namespace

FeatureMatrix load_features(const std::string& path, const HinGraph& g, std::size_t d) {
  return load_course_matrix(path, g, d, 'f');
}

FeatureMatrix load_features(const std::string& path, const HinGraph& g) {
  return load_course_matrix(path, g, header_width(path, 'f'), 'f');
}

void save_features(const FeatureMatrix& x, const HinGraph& g, const std::string& path) {
  save_course_matrix(x, g, path, 'f');
}

Tensor load_embeddings(const std::string& path, const HinGraph& g) {
  return load_course_matrix(path, g, header_width(path, 'e'), 'e');
}

void save_embeddings(const Tensor& h, const HinGraph& g, const std::string& path) {
  save_course_matrix(h, g, path, 'e');
}

}  // namespace coursemi
