#include "coursemi/metapath.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <set>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

MetaPath MetaPath::parse(const std::string& s) {
  std::string k;
  for (const char c : s) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "mp1" || k == "teacher") return mp1();
  if (k == "mp2" || k == "student") return mp2();
  if (k == "mp3" || k == "subject") return mp3();
  throw ConfigError("unknown meta-path '" + s + "' (expected MP1, MP2 or MP3)");
}

std::vector<MetaPath> MetaPath::parse_list(const std::string& s) {
  std::vector<MetaPath> out;
  for (auto part : io::split(s, ',')) {
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.front()))) part.remove_prefix(1);
    while (!part.empty() && std::isspace(static_cast<unsigned char>(part.back()))) part.remove_suffix(1);
    if (part.empty()) continue;
    out.push_back(parse(std::string(part)));
  }
  return out;
}

EdgeType relation_of(const MetaPath& mp) {
  switch (mp.intermediate) {
    case NodeType::Teacher: return EdgeType::Upload;
    case NodeType::Student: return EdgeType::Click;
    case NodeType::Subject: return EdgeType::Include;
    case NodeType::Course: break;
  }
  throw ConfigError("meta-path '" + mp.label + "' has no course relation");
}

ViewGraph ViewGraph::from_adjacency(MetaPath mp, Tensor adjacency) {
  ViewGraph v;
  v.metapath = std::move(mp);
  v.normalized = normalize(adjacency);
  const auto n = adjacency.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (adjacency(i, j) != 0.0) v.edges.emplace_back(i, j);
  v.adjacency = std::move(adjacency);
  return v;
}

Tensor project(const HinGraph& g, const MetaPath& mp, const ProjectionOptions& opts) {
  const auto rel = relation_of(mp);
  const auto inter = g.range(mp.intermediate);
  const auto courses = g.range(NodeType::Course);

  std::vector<std::vector<std::size_t>> incident(inter.size());
  for (const auto& e : g.edges()) {
    if (e.type != rel) continue;
    incident[e.src - inter.begin].push_back(e.dst - courses.begin);
  }

  const auto n = courses.size();
  Tensor a(n, n);
  for (const auto& list : incident) {
    for (std::size_t x = 0; x < list.size(); ++x) {
      for (std::size_t y = x + 1; y < list.size(); ++y) {
        const auto i = list[x];
        const auto j = list[y];
        if (i == j) continue;
        if (opts.weighted) {
          a(i, j) += 1.0;
          a(j, i) += 1.0;
        } else {
          a(i, j) = 1.0;
          a(j, i) = 1.0;
        }
      }
    }
  }
  return a;
}

Tensor normalize(const Tensor& adjacency) {
  const auto n = adjacency.rows();
  if (adjacency.cols() != n) throw ShapeError("adjacency must be square, got " + adjacency.shape_string());
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d += adjacency(i, j);
    }
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  Tensor out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double aij = (i == j ? 1.0 : adjacency(i, j));
      if (aij != 0.0) out(i, j) = aij * (inv_sqrt[i] * inv_sqrt[j]);
    }
  }
  return out;
}

std::vector<ViewGraph> project_all(const HinGraph& g, const std::vector<MetaPath>& mps,
                                   const ProjectionOptions& opts) {
  std::set<std::string> labels;
  for (const auto& mp : mps) {
    if (!labels.insert(mp.label).second) throw ConfigError("duplicate meta-path '" + mp.label + "'");
  }
  std::vector<ViewGraph> views;
  views.reserve(mps.size());
  for (const auto& mp : mps) {
    views.push_back(ViewGraph::from_adjacency(mp, project(g, mp, opts)));
  }
  return views;
}

void dump_adjacency(const std::vector<ViewGraph>& views, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& v : views) {
    std::string out = "i\tj\n";
    for (const auto& [i, j] : v.edges) out += std::to_string(i) + '\t' + std::to_string(j) + '\n';
    io::write_atomic((std::filesystem::path(dir) / (v.metapath.label + ".tsv")).string(), out);
  }
}

}  // namespace coursemi
