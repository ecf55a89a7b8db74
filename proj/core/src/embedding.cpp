#include "bugtriage/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "bugtriage/common.hpp"
#include "bugtriage/csv.hpp"
#include "bugtriage/pca.hpp"

namespace bugtriage::devtopics {

namespace {

std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc{} || ptr != end || t.empty()) return std::nullopt;
  return v;
}

}  // namespace

ExternalEmbeddings ExternalEmbeddings::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError("embedding file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto records = csv::parse(buf.str());

  ExternalEmbeddings table;
  bool first = true;
  for (const auto& rec : records) {
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (first) {
      first = false;
      if (rec.size() >= 2 && !parse_double(rec[1])) continue;  // header
    }
    const std::string id = trim(rec.at(0));
    if (rec.size() < 2) throw DataError("embedding file: no vector for id " + id);
    if (table.dims_ == 0) table.dims_ = rec.size() - 1;
    if (rec.size() - 1 != table.dims_) {
      throw DataError("embedding file: id " + id + " has " + std::to_string(rec.size() - 1) +
                      " components, expected " + std::to_string(table.dims_));
    }
    std::vector<double> v;
    v.reserve(table.dims_);
    for (std::size_t i = 1; i < rec.size(); ++i) {
      const auto x = parse_double(rec[i]);
      if (!x || !std::isfinite(*x)) throw DataError("embedding file: non-numeric or non-finite value for id " + id);
      v.push_back(*x);
    }
    if (!table.rows_.emplace(id, std::move(v)).second) throw DataError("embedding file: duplicate id " + id);
  }
  return table;
}

const std::vector<double>* ExternalEmbeddings::find(const std::string& id) const {
  auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

Eigen::MatrixXd embed_tfidf_lsa(std::span<const text::BowVector> bows, const text::Vocabulary& vocab,
                                std::size_t dims) {
  if (dims == 0) throw ArgumentError("embedding: dims must be positive");
  const auto n = static_cast<Eigen::Index>(bows.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(dims));
  if (n < 2 || vocab.empty()) return out;
  const Eigen::MatrixXd x = text::tfidf_matrix(bows, vocab);
  const std::size_t r = std::min({dims, static_cast<std::size_t>(n - 1), vocab.size()});
  const auto reduced = pca_transform(pca_fit(x, r), x);
  out.leftCols(reduced.cols()) = reduced;
  return out;
}

Eigen::MatrixXd embed_external(std::span<const std::string> doc_ids, const ExternalEmbeddings& table) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(doc_ids.size()), static_cast<Eigen::Index>(table.dims()));
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    const auto* v = table.find(doc_ids[i]);
    if (!v) throw DataError("embedding file: no vector for id " + doc_ids[i]);
    for (std::size_t k = 0; k < v->size(); ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (*v)[k];
  }
  return out;
}

Eigen::MatrixXd embed(std::span<const std::string> doc_ids, std::span<const text::BowVector> bows,
                      const text::Vocabulary& vocab, const EmbeddingProvider& provider,
                      const ExternalEmbeddings* table) {
  switch (provider.kind) {
    case EmbeddingKind::tfidf_lsa:
      return embed_tfidf_lsa(bows, vocab, provider.dims);
    case EmbeddingKind::external_file:
      if (!table) throw ArgumentError("embedding: external_file provider needs a loaded table");
      return embed_external(doc_ids, *table);
  }
  throw ArgumentError("embedding: unknown provider");
}

nlohmann::json to_json(const EmbeddingProvider& p) {
  if (p.kind == EmbeddingKind::external_file) return {{"kind", "external_file"}, {"path", p.path.string()}};
  return {{"kind", "tfidf_lsa"}, {"dims", p.dims}};
}

EmbeddingProvider embedding_provider_from_json(const nlohmann::json& j) {
  EmbeddingProvider p;
  const auto kind = j.value("kind", std::string("tfidf_lsa"));
  if (kind == "tfidf_lsa") {
    p.kind = EmbeddingKind::tfidf_lsa;
    p.dims = j.value("dims", p.dims);
  } else if (kind == "external_file") {
    p.kind = EmbeddingKind::external_file;
    p.path = j.at("path").get<std::string>();
  } else {
    throw ArgumentError("embedding: unknown provider kind '" + kind + "'");
  }
  return p;
}

}  // namespace bugtriage::devtopics
