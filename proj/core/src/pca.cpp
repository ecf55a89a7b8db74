#include "bugtriage/pca.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bugtriage/common.hpp"

namespace bugtriage::devtopics {

namespace {

void normalize_sign(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> v) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best + 1e-12) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (v(arg) < 0.0) v = -v;
}

// Replaces rows [from, r) with unit vectors orthogonal to every earlier row,
// taken from the canonical basis by Gram-Schmidt.
void complete_basis(Eigen::MatrixXd& comps, Eigen::Index from) {
  const Eigen::Index d = comps.cols();
  Eigen::Index next_basis = 0;
  for (Eigen::Index row = from; row < comps.rows(); ++row) {
    for (; next_basis < d; ++next_basis) {
      Eigen::RowVectorXd v = Eigen::RowVectorXd::Unit(d, next_basis);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < row; ++j) v -= v.dot(comps.row(j)) * comps.row(j);
      }
      const double n = v.norm();
      if (n > 1e-6) {
        comps.row(row) = v / n;
        ++next_basis;
        break;
      }
    }
  }
}

}  // namespace

PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t r) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  const auto rr = static_cast<Eigen::Index>(r);
  if (n < 2) throw ArgumentError("pca_fit: need at least two rows");
  if (rr < 1 || rr > std::min(n - 1, d)) throw ArgumentError("pca_fit: r must be in [1, min(N-1, d)]");

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  model.components.resize(rr, d);
  model.explained_variance.resize(rr);
  Eigen::Index valid = rr;

  if (d <= n) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw DataError("pca_fit: eigendecomposition failed");
    for (Eigen::Index i = 0; i < rr; ++i) {
      const Eigen::Index src = d - 1 - i;  // eigenvalues come back ascending
      model.components.row(i) = solver.eigenvectors().col(src).transpose();
      model.explained_variance(i) = std::max(0.0, solver.eigenvalues()(src));
    }
  } else {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw DataError("pca_fit: eigendecomposition failed");
    const double top = std::max(solver.eigenvalues()(n - 1), 0.0);
    for (Eigen::Index i = 0; i < rr; ++i) {
      const Eigen::Index src = n - 1 - i;
      const double mu = solver.eigenvalues()(src);
      if (!(mu > 1e-12 * std::max(top, 1e-300)) || mu <= 0.0) {
        valid = i;
        break;
      }
      model.components.row(i) = (centered.transpose() * solver.eigenvectors().col(src)).transpose() / std::sqrt(mu);
      model.explained_variance(i) = mu / denom;
    }
    for (Eigen::Index i = valid; i < rr; ++i) model.explained_variance(i) = 0.0;
    if (valid < rr) complete_basis(model.components, valid);
  }
  for (Eigen::Index i = 0; i < rr; ++i) normalize_sign(model.components.row(i));
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& data) {
  if (data.cols() != model.mean.size()) throw ArgumentError("pca_transform: dimension mismatch");
  return (data.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::MatrixXd pca_inverse_transform(const PcaModel& model, const Eigen::MatrixXd& reduced) {
  if (reduced.cols() != model.components.rows()) throw ArgumentError("pca_inverse_transform: dimension mismatch");
  return (reduced * model.components).rowwise() + model.mean.transpose();
}

nlohmann::json to_json(const PcaModel& m) {
  nlohmann::json comps = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.components.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.components.cols()));
    for (Eigen::Index j = 0; j < m.components.cols(); ++j) row[static_cast<std::size_t>(j)] = m.components(i, j);
    comps.push_back(std::move(row));
  }
  return {{"mean", std::vector<double>(m.mean.data(), m.mean.data() + m.mean.size())},
          {"components", comps},
          {"explained_variance",
           std::vector<double>(m.explained_variance.data(), m.explained_variance.data() + m.explained_variance.size())}};
}

PcaModel pca_from_json(const nlohmann::json& j) {
  PcaModel m;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto comps = j.at("components").get<std::vector<std::vector<double>>>();
  const auto ev = j.at("explained_variance").get<std::vector<double>>();
  m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.components.resize(static_cast<Eigen::Index>(comps.size()), static_cast<Eigen::Index>(mean.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].size() != mean.size()) throw DataError("pca model: component length mismatch");
    for (std::size_t k = 0; k < mean.size(); ++k) {
      m.components(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = comps[i][k];
    }
  }
  if (ev.size() != comps.size()) throw DataError("pca model: explained variance length mismatch");
  m.explained_variance = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
  return m;
}

}  // namespace bugtriage::devtopics
