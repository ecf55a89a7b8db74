#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bugtriage/clustering.hpp"
#include "bugtriage/common.hpp"

namespace bugtriage::devtopics {

namespace {

// Lambda = 1 / distance; zero distances are capped so stabilities stay finite.
constexpr double kMinDistance = 1e-12;

double lambda_of(double distance) { return 1.0 / std::max(distance, kMinDistance); }

struct Edge {
  std::size_t a, b;
  double w;
};

struct Merge {
  std::size_t left, right;  // node ids; < N are points
  double distance;
  std::size_t size;
};

struct CondensedEdge {
  std::size_t parent;  // cluster id
  std::size_t child;   // point id (< N) or N + cluster id
  double lambda;
  std::size_t size;
};

std::vector<Edge> mutual_reachability_mst(const Eigen::MatrixXd& x, std::size_t min_samples) {
  const auto n = static_cast<std::size_t>(x.rows());
  Eigen::MatrixXd dist(x.rows(), x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) dist(i, j) = dist(j, i) = (x.row(i) - x.row(j)).norm();
  }
  std::vector<double> core(n, 0.0);
  const std::size_t kth = std::min(min_samples, n - 1);
  std::vector<double> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kth - 1), row.end());
    core[i] = row[kth - 1];
  }
  auto mr = [&](std::size_t i, std::size_t j) {
    return std::max({core[i], core[j], dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  };

  // Prim's algorithm on the dense graph; ties go to the lowest point index.
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double w = mr(current, j);
      if (w < best[j]) {
        best[j] = w;
        from[j] = current;
      }
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = true;
    edges.push_back({from[next], next, best[next]});
    current = next;
  }
  return edges;
}

std::vector<Merge> single_linkage(std::vector<Edge> edges, std::size_t n) {
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
    if (l.w != r.w) return l.w < r.w;
    const auto lk = std::minmax(l.a, l.b);
    const auto rk = std::minmax(r.a, r.b);
    return lk < rk;
  });
  // Union-find over points; each root remembers the dendrogram node it forms.
  std::vector<std::size_t> parent(n), node(n), size(n, 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::iota(node.begin(), node.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<Merge> merges;
  merges.reserve(n - 1);
  for (const auto& e : edges) {
    const std::size_t ra = find(e.a), rb = find(e.b);
    merges.push_back({node[ra], node[rb], e.w, size[ra] + size[rb]});
    parent[rb] = ra;
    size[ra] += size[rb];
    node[ra] = n + merges.size() - 1;
  }
  return merges;
}

std::vector<CondensedEdge> condense(const std::vector<Merge>& merges, std::size_t n, std::size_t min_cluster_size,
                                    std::size_t& num_clusters) {
  auto node_size = [&](std::size_t v) { return v < n ? std::size_t{1} : merges[v - n].size; };
  auto collect_points = [&](std::size_t v, std::vector<std::size_t>& out) {
    std::vector<std::size_t> stack{v};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      if (u < n) {
        out.push_back(u);
      } else {
        stack.push_back(merges[u - n].right);
        stack.push_back(merges[u - n].left);
      }
    }
  };

  std::vector<CondensedEdge> out;
  num_clusters = 1;  // cluster 0 is the root
  // (dendrogram node, condensed cluster it currently belongs to)
  std::vector<std::pair<std::size_t, std::size_t>> stack{{n + merges.size() - 1, 0}};
  std::vector<std::size_t> pts;
  while (!stack.empty()) {
    const auto [v, cluster] = stack.back();
    stack.pop_back();
    const Merge& m = merges[v - n];
    const double lambda = lambda_of(m.distance);
    const std::size_t ls = node_size(m.left), rs = node_size(m.right);
    const bool left_big = ls >= min_cluster_size, right_big = rs >= min_cluster_size;

    auto fall_out = [&](std::size_t child) {
      pts.clear();
      collect_points(child, pts);
      std::sort(pts.begin(), pts.end());
      for (auto p : pts) out.push_back({cluster, p, lambda, 1});
    };
    auto continue_as = [&](std::size_t child, std::size_t cl) {
      if (child < n) {
        out.push_back({cl, child, lambda, 1});
      } else {
        stack.push_back({child, cl});
      }
    };

    if (left_big && right_big) {
      for (std::size_t child : {m.left, m.right}) {
        const std::size_t id = num_clusters++;
        out.push_back({cluster, n + id, lambda, node_size(child)});
        stack.push_back({child, id});
      }
    } else if (!left_big && !right_big) {
      fall_out(m.left);
      fall_out(m.right);
    } else if (left_big) {
      fall_out(m.right);
      continue_as(m.left, cluster);
    } else {
      fall_out(m.left);
      continue_as(m.right, cluster);
    }
  }
  return out;
}

}  // namespace

ClusterAssignment density_cluster(const Eigen::MatrixXd& points, std::size_t min_cluster_size, std::size_t min_samples) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (min_cluster_size < 2) throw ArgumentError("density_cluster: min_cluster_size must be at least 2");
  if (min_samples < 1) throw ArgumentError("density_cluster: min_samples must be at least 1");
  if (n < min_cluster_size) throw ArgumentError("density_cluster: fewer points than min_cluster_size");

  ClusterAssignment out;
  out.method = "density";
  out.params = {{"min_cluster_size", min_cluster_size}, {"min_samples", min_samples}};
  out.labels.assign(n, kOutlier);

  const auto edges = mutual_reachability_mst(points, min_samples);
  const double max_weight =
      std::max_element(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.w < b.w; })->w;
  if (max_weight <= 0.0) {
    out.labels.assign(n, 0);
    out.num_clusters = 1;
    out.centroids = cluster_means(points, out.labels, 1);
    return out;
  }

  const auto merges = single_linkage(edges, n);
  std::size_t num_clusters = 0;
  const auto tree = condense(merges, n, min_cluster_size, num_clusters);

  std::vector<double> birth(num_clusters, 0.0);
  std::vector<std::size_t> tree_parent(num_clusters, 0);
  std::vector<std::vector<std::size_t>> children(num_clusters);
  for (const auto& e : tree) {
    if (e.child >= n) {
      const std::size_t c = e.child - n;
      birth[c] = e.lambda;
      tree_parent[c] = e.parent;
      children[e.parent].push_back(c);
    }
  }
  std::vector<double> stability(num_clusters, 0.0);
  for (const auto& e : tree) {
    stability[e.parent] += (e.lambda - birth[e.parent]) * static_cast<double>(e.size);
  }

  // Excess of mass, leaves first (children always have larger ids).
  std::vector<bool> selected(num_clusters, false);
  for (std::size_t c = num_clusters; c-- > 1;) {
    double child_sum = 0.0;
    for (auto ch : children[c]) child_sum += stability[ch];
    if (!children[c].empty() && child_sum > stability[c]) {
      stability[c] = child_sum;
    } else {
      selected[c] = true;
      std::vector<std::size_t> stack(children[c].begin(), children[c].end());
      while (!stack.empty()) {
        const std::size_t d = stack.back();
        stack.pop_back();
        selected[d] = false;
        stack.insert(stack.end(), children[d].begin(), children[d].end());
      }
    }
  }

  // Each point belongs to the nearest selected ancestor of the cluster it fell out of.
  std::vector<int> raw(n, kOutlier);
  for (const auto& e : tree) {
    if (e.child >= n) continue;
    std::size_t c = e.parent;
    while (c != 0 && !selected[c]) c = tree_parent[c];
    if (c != 0) raw[e.child] = static_cast<int>(c);
  }

  // Contiguous ids ordered by each cluster's lowest point index.
  std::vector<int> remap(num_clusters, kOutlier);
  int next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (raw[p] == kOutlier) continue;
    auto& r = remap[static_cast<std::size_t>(raw[p])];
    if (r == kOutlier) r = next++;
    out.labels[p] = r;
  }
  out.num_clusters = static_cast<std::size_t>(next);
  out.centroids = cluster_means(points, out.labels, out.num_clusters);
  return out;
}

}  // namespace bugtriage::devtopics
