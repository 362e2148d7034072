#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pmorph/grid.hpp"

namespace pmorph {

enum class ClusterSign { rich, poor, neutral };

inline std::string to_string(ClusterSign s) {
  switch (s) {
    case ClusterSign::rich: return "rich";
    case ClusterSign::poor: return "poor";
    default: return "neutral";
  }
}

struct Cluster {
  std::vector<std::int64_t> members;  // grid indices, ascending
  double mean_u = 0, mean_v = 0;
  ClusterSign sign = ClusterSign::neutral;
  int level = 0;        // tree level of the cluster root
  std::int64_t node = 0;  // node id (Itilde mod p^level)
};

struct ClusterReport {
  std::vector<Cluster> clusters;  // partition of the grid
  double threshold = 0;
  std::int64_t rich_count = 0, poor_count = 0, neutral_count = 0;
  std::map<std::size_t, std::int64_t> size_histogram;  // size -> #clusters
};

// Scale-free default: a tenth of the pattern's standard deviation.
inline double default_cluster_threshold(const Eigen::VectorXd& u, double u_ref) {
  Eigen::ArrayXd w = u.array() - u_ref;
  double var = (w - w.mean()).square().sum() / static_cast<double>(w.size());
  return 0.1 * std::sqrt(var);
}

// Labels each point activator-rich (u - u_ref > threshold), activator-poor
// (< -threshold) or neutral, then agglomerates bottom-up: a tree node carries
// a label when all its children share it. Clusters are the maximal labeled
// subtrees, so they partition the grid into unions of balls.
inline ClusterReport cluster_analysis(const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& v,
                                      const GridGeometry& g, double u_ref,
                                      double threshold) {
  if (u.size() != g.N || v.size() != g.N)
    throw std::invalid_argument("cluster_analysis: field length != N");
  const int depth = g.levels();
  const int p = g.p;
  constexpr int kMixed = 99;

  // labels[l][c] for node c at level l (c = Itilde mod p^l)
  std::vector<std::vector<int>> labels(static_cast<std::size_t>(depth) + 1);
  labels[static_cast<std::size_t>(depth)].resize(static_cast<std::size_t>(g.N));
  for (std::int64_t i = 0; i < g.N; ++i) {
    double w = u(i) - u_ref;
    int lab = w > threshold ? 0 : (w < -threshold ? 1 : 2);
    labels[static_cast<std::size_t>(depth)][static_cast<std::size_t>(i)] = lab;
  }
  std::int64_t width = g.N;
  for (int l = depth - 1; l >= 0; --l) {
    width /= p;
    auto& cur = labels[static_cast<std::size_t>(l)];
    const auto& child = labels[static_cast<std::size_t>(l) + 1];
    cur.resize(static_cast<std::size_t>(width));
    for (std::int64_t c = 0; c < width; ++c) {
      int lab = child[static_cast<std::size_t>(c)];
      for (int a = 1; a < p; ++a)
        if (child[static_cast<std::size_t>(c + a * width)] != lab) {
          lab = kMixed;
          break;
        }
      cur[static_cast<std::size_t>(c)] = lab;
    }
  }

  ClusterReport rep;
  rep.threshold = threshold;

  // depth-first from the root; emit a cluster at each maximal labeled node
  struct Frame {
    int level;
    std::int64_t node;
  };
  std::vector<Frame> stack{{0, 0}};
  std::vector<Cluster> found;
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    int lab = labels[static_cast<std::size_t>(f.level)][static_cast<std::size_t>(f.node)];
    if (lab == kMixed) {
      std::int64_t w = 1;
      for (int i = 0; i < f.level; ++i) w *= p;
      for (int a = p - 1; a >= 0; --a)
        stack.push_back({f.level + 1, f.node + a * w});
      continue;
    }
    Cluster cl;
    cl.level = f.level;
    cl.node = f.node;
    cl.sign = lab == 0 ? ClusterSign::rich
                       : (lab == 1 ? ClusterSign::poor : ClusterSign::neutral);
    std::int64_t stride = 1;
    for (int i = 0; i < f.level; ++i) stride *= p;
    for (std::int64_t i = f.node; i < g.N; i += stride) cl.members.push_back(i);
    double su = 0, sv = 0;
    for (std::int64_t i : cl.members) {
      su += u(i);
      sv += v(i);
    }
    cl.mean_u = su / static_cast<double>(cl.members.size());
    cl.mean_v = sv / static_cast<double>(cl.members.size());
    found.push_back(std::move(cl));
  }
  std::sort(found.begin(), found.end(), [](const Cluster& a, const Cluster& b) {
    return a.members.front() < b.members.front();
  });
  for (const Cluster& c : found) {
    switch (c.sign) {
      case ClusterSign::rich: ++rep.rich_count; break;
      case ClusterSign::poor: ++rep.poor_count; break;
      default: ++rep.neutral_count; break;
    }
    ++rep.size_histogram[c.members.size()];
  }
  rep.clusters = std::move(found);
  return rep;
}

// Grid tree in DOT format with cluster roots colored by sign; hand the output
// to graphviz for rendering.
inline std::string cluster_tree_dot(const ClusterReport& rep, const GridGeometry& g) {
  const int depth = g.levels();
  const int p = g.p;
  std::map<std::pair<int, std::int64_t>, const Cluster*> roots;
  for (const Cluster& c : rep.clusters) roots[{c.level, c.node}] = &c;

  std::ostringstream out;
  out << "digraph grid_tree {\n  node [shape=circle, style=filled, fillcolor=white];\n";
  std::int64_t width = 1;
  for (int l = 0; l <= depth; ++l) {
    for (std::int64_t c = 0; c < width; ++c) {
      out << "  n" << l << "_" << c;
      auto it = roots.find({l, c});
      if (it != roots.end()) {
        const char* color = it->second->sign == ClusterSign::rich      ? "tomato"
                            : it->second->sign == ClusterSign::poor    ? "steelblue"
                                                                       : "gray80";
        out << " [fillcolor=" << color << ", label=\"" << to_string(it->second->sign)
            << "\\n" << it->second->members.size() << "\"]";
      } else if (l == depth) {
        out << " [label=\"" << c << "\"]";
      } else {
        out << " [label=\"\"]";
      }
      out << ";\n";
    }
    if (l < depth) {
      for (std::int64_t c = 0; c < width * p; ++c)
        out << "  n" << l << "_" << (c % width) << " -> n" << (l + 1) << "_" << c
            << ";\n";
    }
    width *= p;
  }
  out << "}\n";
  return out.str();
}

}  // namespace pmorph
