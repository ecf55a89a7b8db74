#include <algorithm>
#include <cmath>
#include <limits>

#include "bugtriage/clustering.hpp"
#include "bugtriage/common.hpp"

namespace bugtriage::devtopics {

std::size_t ClusterAssignment::outlier_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kOutlier));
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                              std::size_t num_clusters) {
  const auto C = static_cast<Eigen::Index>(num_clusters);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(C, points.cols());
  std::vector<double> sizes(num_clusters, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    sums.row(labels[i]) += points.row(static_cast<Eigen::Index>(i));
    sizes[static_cast<std::size_t>(labels[i])] += 1.0;
  }
  for (Eigen::Index c = 0; c < C; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) sums.row(c) /= sizes[static_cast<std::size_t>(c)];
  }
  return sums;
}

namespace {

double sq_dist(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& x, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), x.cols());
  const std::size_t trials = 2 + static_cast<std::size_t>(std::floor(std::log(static_cast<double>(k))));

  const auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n)));
  centers.row(0) = x.row(first);
  std::vector<double> closest(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) closest[static_cast<std::size_t>(i)] = sq_dist(x, i, centers, 0);

  std::vector<double> candidate_dist(static_cast<std::size_t>(n));
  std::vector<double> best_dist(static_cast<std::size_t>(n));
  for (std::size_t c = 1; c < k; ++c) {
    double potential = 0.0;
    for (double d : closest) potential += d;
    double best_potential = std::numeric_limits<double>::infinity();
    Eigen::Index best = -1;
    for (std::size_t t = 0; t < trials; ++t) {
      // With zero potential every point already coincides with a centre.
      const auto cand = static_cast<Eigen::Index>(potential > 0.0 ? rng.discrete(closest)
                                                                  : rng.below(static_cast<std::size_t>(n)));
      double pot = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        candidate_dist[ii] = std::min(closest[ii], sq_dist(x, i, x, cand));
        pot += candidate_dist[ii];
      }
      if (pot < best_potential) {
        best_potential = pot;
        best = cand;
        best_dist = candidate_dist;
      }
    }
    centers.row(static_cast<Eigen::Index>(c)) = x.row(best);
    closest = best_dist;
  }
  return centers;
}

double assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(x, i, centers, c);
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    inertia += best;
  }
  return inertia;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0) throw ArgumentError("kmeans: k must be positive");
  if (k > n) throw ArgumentError("kmeans: k (" + std::to_string(k) + ") exceeds point count (" + std::to_string(n) + ")");

  Rng rng(seed);
  ClusterAssignment out;
  out.method = "kmeans";
  out.params = {{"k", k}, {"seed", seed}, {"max_iter", max_iter}};
  out.num_clusters = k;
  out.centroids = seed_centroids(points, k, rng);
  out.labels.assign(n, 0);

  out.inertia = assign(points, out.centroids, out.labels);
  out.inertia_history.push_back(out.inertia);
  std::vector<int> previous;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(out.labels[i]) += points.row(static_cast<Eigen::Index>(i));
      ++sizes[static_cast<std::size_t>(out.labels[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) out.centroids.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(sizes[c]);
    }
    previous = out.labels;
    out.inertia = assign(points, out.centroids, out.labels);
    out.inertia_history.push_back(out.inertia);
    out.iterations = it + 1;
    if (out.labels == previous) break;
  }
  return out;
}

nlohmann::json to_json(const ClusterAssignment& a) {
  nlohmann::json centroids = nlohmann::json::array();
  for (Eigen::Index c = 0; c < a.centroids.rows(); ++c) {
    std::vector<double> row(static_cast<std::size_t>(a.centroids.cols()));
    for (Eigen::Index j = 0; j < a.centroids.cols(); ++j) row[static_cast<std::size_t>(j)] = a.centroids(c, j);
    centroids.push_back(std::move(row));
  }
  return {{"method", a.method},
          {"params", a.params},
          {"num_clusters", a.num_clusters},
          {"labels", a.labels},
          {"centroids", centroids},
          {"inertia", a.inertia},
          {"inertia_history", a.inertia_history},
          {"iterations", a.iterations}};
}

ClusterAssignment cluster_assignment_from_json(const nlohmann::json& j) {
  ClusterAssignment a;
  a.method = j.at("method").get<std::string>();
  a.params = j.at("params");
  a.num_clusters = j.at("num_clusters").get<std::size_t>();
  a.labels = j.at("labels").get<std::vector<int>>();
  for (int l : a.labels) {
    if (l < kOutlier || (l >= 0 && static_cast<std::size_t>(l) >= a.num_clusters)) {
      throw DataError("cluster assignment: label out of range");
    }
  }
  const auto rows = j.at("centroids").get<std::vector<std::vector<double>>>();
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  a.centroids.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (rows[c].size() != cols) throw DataError("cluster assignment: ragged centroids");
    for (std::size_t k = 0; k < cols; ++k) a.centroids(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = rows[c][k];
  }
  a.inertia = j.value("inertia", 0.0);
  a.inertia_history = j.value("inertia_history", std::vector<double>{});
  a.iterations = j.value("iterations", std::size_t{0});
  return a;
}

}  // namespace bugtriage::devtopics
