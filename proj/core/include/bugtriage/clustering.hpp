#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace bugtriage::devtopics {

inline constexpr int kOutlier = -1;

struct ClusterAssignment {
  std::vector<int> labels;    // per point: kOutlier or 0..C-1
  Eigen::MatrixXd centroids;  // C x r; member mean for density clusters
  std::size_t num_clusters = 0;
  std::string method;         // "kmeans" or "density"
  nlohmann::json params;      // k and seed, or min_cluster_size and min_samples

  // kmeans only
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after every assignment step
  std::size_t iterations = 0;

  std::size_t outlier_count() const;
};

/// k-means++ seeding (greedy, 2 + floor(ln k) candidates per step) followed
/// by Lloyd iterations until the assignment stops changing or max_iter is
/// reached. An emptied cluster keeps its previous centroid; distance ties go
/// to the lower cluster id. Throws ArgumentError when k == 0 or k > N.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                         std::size_t max_iter = 300);

/// Simplified HDBSCAN: core distance is the Euclidean distance to the
/// min_samples-th nearest other point; the MST over mutual reachability
/// distances gives a single-linkage hierarchy which is condensed with
/// min_cluster_size and cut by excess of mass. The root is never selected,
/// except that a data set with all pairwise distances zero forms one cluster.
/// Throws ArgumentError unless N >= min_cluster_size >= 2 and min_samples >= 1.
ClusterAssignment density_cluster(const Eigen::MatrixXd& points, std::size_t min_cluster_size = 5,
                                  std::size_t min_samples = 5);

/// Mean of each cluster's members; a cluster without members gets a zero row.
Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                              std::size_t num_clusters);

nlohmann::json to_json(const ClusterAssignment& a);
ClusterAssignment cluster_assignment_from_json(const nlohmann::json& j);

}  // namespace bugtriage::devtopics
