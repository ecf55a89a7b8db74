#pragma once

#include <cstddef>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace bugtriage::devtopics {

struct PcaModel {
  Eigen::VectorXd mean;                // d
  Eigen::MatrixXd components;          // r x d, orthonormal rows
  Eigen::VectorXd explained_variance;  // r, non-increasing, >= 0

  std::size_t input_dims() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dims() const { return static_cast<std::size_t>(components.rows()); }
};

/// Eigendecomposition of the sample covariance (or, when d > N, of the Gram
/// matrix of the centered data, which has the same non-zero spectrum). Each
/// axis is sign-normalized so its largest-magnitude entry is positive.
/// Throws ArgumentError unless N >= 2 and 1 <= r <= min(N - 1, d).
PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t r);

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data);
Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& reduced);

nlohmann::json to_json(const PcaModel& model);
PcaModel pca_from_json(const nlohmann::json& j);

}  // namespace bugtriage::devtopics
