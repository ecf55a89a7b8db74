#include "bugtriage/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "bugtriage/common.hpp"
#include "bugtriage/csv.hpp"

namespace bugtriage::text {

namespace detail {
extern const std::string_view kDefaultStopwordsText;
}

namespace {

bool is_ascii(unsigned char c) { return c < 0x80; }
bool is_alnum_byte(unsigned char c) { return !is_ascii(c) || std::isalnum(c) != 0; }
bool is_upper(unsigned char c) { return is_ascii(c) && std::isupper(c) != 0; }
bool is_lower(unsigned char c) { return is_ascii(c) && std::islower(c) != 0; }

// Length in bytes of a Unicode whitespace sequence at s[i], 0 if none.
std::size_t whitespace_at(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (is_ascii(c)) return std::isspace(c) ? 1 : 0;
  auto match = [&](std::string_view seq) { return s.substr(i, seq.size()) == seq ? seq.size() : 0; };
  if (auto n = match("\xC2\xA0")) return n;          // no-break space
  if (auto n = match("\xE1\x9A\x80")) return n;      // ogham space mark
  if (auto n = match("\xE3\x80\x80")) return n;      // ideographic space
  if (auto n = match("\xE2\x81\x9F")) return n;      // medium mathematical space
  if (s.substr(i, 2) == "\xE2\x80" && i + 2 < s.size()) {
    const auto d = static_cast<unsigned char>(s[i + 2]);
    if ((d >= 0x80 && d <= 0x8A) || d == 0xA8 || d == 0xA9 || d == 0xAF) return 3;
  }
  return 0;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size();) {
    if (auto n = whitespace_at(s, i)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      i += n;
    } else {
      cur += s[i++];
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool has_camel_case(std::string_view t) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    const auto prev = static_cast<unsigned char>(t[i - 1]);
    const auto cur = static_cast<unsigned char>(t[i]);
    if (is_lower(prev) && is_upper(cur)) return true;
    if (is_upper(prev) && is_upper(cur) && i + 1 < t.size() &&
        is_lower(static_cast<unsigned char>(t[i + 1])) && i >= 1) {
      return true;
    }
  }
  return false;
}

// Identifier-ish tokens: camelCase, snake_case, dotted/pathed names, calls.
bool looks_like_code(std::string_view t) {
  if (has_camel_case(t)) return true;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const char c = t[i];
    const bool alnum_before = i > 0 && is_alnum_byte(static_cast<unsigned char>(t[i - 1]));
    const bool alnum_after = i + 1 < t.size() && is_alnum_byte(static_cast<unsigned char>(t[i + 1]));
    switch (c) {
      case '_':
        if (alnum_before || alnum_after) return true;
        break;
      case '.':
      case '/':
      case '\\':
      case ':':
      case '-':
      case '$':
      case '#':
        if (alnum_before && alnum_after) return true;
        break;
      case '(':
      case '[':
      case '<':
      case '=':
        if (alnum_before) return true;
        break;
      default:
        break;
    }
  }
  return false;
}

// Splits on non-alphanumeric bytes, then on camelCase boundaries.
std::vector<std::string> split_identifier(std::string_view t) {
  std::vector<std::string> parts;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) parts.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto c = static_cast<unsigned char>(t[i]);
    if (!is_alnum_byte(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const auto prev = static_cast<unsigned char>(cur.back());
      const bool next_lower = i + 1 < t.size() && is_lower(static_cast<unsigned char>(t[i + 1]));
      if ((is_lower(prev) && is_upper(c)) || (is_upper(prev) && is_upper(c) && next_lower)) flush();
    }
    cur += static_cast<char>(c);
  }
  flush();
  return parts;
}

std::string strip_punctuation(std::string_view t) {
  static constexpr std::string_view kUnicodePunct[] = {
      "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9C", "\xE2\x80\x9D",  // quotes
      "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x80\xA6",                  // dashes, ellipsis
      "\xC2\xAB",     "\xC2\xBB"};                                      // guillemets
  std::string out;
  out.reserve(t.size());
  for (std::size_t i = 0; i < t.size();) {
    const auto c = static_cast<unsigned char>(t[i]);
    if (is_ascii(c)) {
      if (!std::ispunct(c)) out += static_cast<char>(c);
      ++i;
      continue;
    }
    bool skipped = false;
    for (auto p : kUnicodePunct) {
      if (t.substr(i, p.size()) == p) {
        i += p.size();
        skipped = true;
        break;
      }
    }
    if (!skipped) out += t[i++];
  }
  return out;
}

bool is_number(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::size_t utf8_length(std::string_view t) {
  return static_cast<std::size_t>(
      std::count_if(t.begin(), t.end(), [](unsigned char c) { return (c & 0xC0) != 0x80; }));
}

std::set<std::string> parse_stopwords(std::string_view text) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(start, end - start));
    if (!line.empty() && line.front() != '#') out.insert(to_lower(line));
    start = end + 1;
  }
  return out;
}

}  // namespace

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = parse_stopwords(detail::kDefaultStopwordsText);
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read stopword file " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_stopwords(content);
}

TokenPipelineConfig TokenPipelineConfig::defaults() {
  TokenPipelineConfig cfg;
  cfg.stopwords = default_stopwords();
  return cfg;
}

void TokenPipelineConfig::validate() const {
  if (ngram_range.first < 1 || ngram_range.first > ngram_range.second || ngram_range.second > 3) {
    throw ArgumentError("ngram_range must satisfy 1 <= lo <= hi <= 3");
  }
  for (const auto& w : stopwords) {
    if (w != to_lower(w)) throw ArgumentError("stopword list must be lowercase: " + w);
  }
}

TokenList tokenize(std::string_view text, const TokenPipelineConfig& cfg) {
  TokenList unigrams;
  for (auto& raw : split_whitespace(text)) {
    std::vector<std::string> pieces;
    if (looks_like_code(raw)) {
      if (cfg.code_handling == CodeHandling::drop) continue;
      pieces = split_identifier(raw);
    } else {
      pieces.push_back(std::move(raw));
    }
    for (auto& p : pieces) {
      std::string tok = cfg.lowercase ? to_lower(p) : std::move(p);
      if (cfg.strip_punctuation) tok = strip_punctuation(tok);
      if (tok.empty()) continue;
      if (cfg.remove_numbers && is_number(tok)) continue;
      if (cfg.stopwords.contains(cfg.lowercase ? tok : to_lower(tok))) continue;
      if (utf8_length(tok) < cfg.min_token_len) continue;
      unigrams.push_back(std::move(tok));
    }
  }

  const auto [lo, hi] = cfg.ngram_range;
  if (lo == 1 && hi == 1) return unigrams;
  TokenList out;
  for (int n = lo; n <= hi; ++n) {
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= unigrams.size(); ++i) {
      std::string gram = unigrams[i];
      for (std::size_t j = 1; j < un; ++j) gram += "_" + unigrams[i + j];
      out.push_back(std::move(gram));
    }
  }
  return out;
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::write_csv(std::ostream& out) const {
  csv::write_record(out, {"token", "index", "df"});
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    csv::write_record(out, {tokens_[i], std::to_string(i), std::to_string(df_[i])});
  }
}

nlohmann::json Vocabulary::to_json() const {
  return {{"tokens", tokens_}, {"df", df_}, {"num_documents", num_documents_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  return from_tokens(j.at("tokens").get<std::vector<std::string>>(),
                     j.at("df").get<std::vector<std::size_t>>(),
                     j.at("num_documents").get<std::size_t>());
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> sorted_tokens, std::vector<std::size_t> df,
                                   std::size_t num_documents) {
  if (sorted_tokens.size() != df.size()) throw DataError("vocabulary: token/df length mismatch");
  Vocabulary v;
  v.tokens_ = std::move(sorted_tokens);
  v.df_ = std::move(df);
  v.num_documents_ = num_documents;
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], i).second) throw DataError("vocabulary: duplicate token");
  }
  return v;
}

Vocabulary build_vocabulary(std::span<const TokenList> docs, std::size_t min_df, double max_df_fraction) {
  if (docs.empty()) throw ArgumentError("build_vocabulary: no documents");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::set<std::string_view> uniq(doc.begin(), doc.end());
    for (auto t : uniq) ++df[std::string(t)];
  }
  const auto n = static_cast<double>(docs.size());
  std::vector<std::string> tokens;
  std::vector<std::size_t> counts;
  for (auto& [tok, count] : df) {
    if (count >= min_df && static_cast<double>(count) / n <= max_df_fraction) {
      tokens.push_back(tok);
      counts.push_back(count);
    }
  }
  if (tokens.empty()) throw InsufficientDataError("build_vocabulary: every token was filtered out");
  return Vocabulary::from_tokens(std::move(tokens), std::move(counts), docs.size());
}

std::size_t BowVector::total() const {
  std::size_t t = 0;
  for (const auto& [i, c] : counts) t += c;
  return t;
}

BowVector to_bow(std::span<const std::string> doc, const Vocabulary& vocab, std::string doc_id) {
  std::map<std::size_t, std::size_t> counts;
  for (const auto& tok : doc) {
    if (auto i = vocab.index_of(tok)) ++counts[*i];
  }
  BowVector bow;
  bow.doc_id = std::move(doc_id);
  bow.counts.assign(counts.begin(), counts.end());
  return bow;
}

std::vector<std::uint32_t> to_indices(std::span<const std::string> doc, const Vocabulary& vocab) {
  std::vector<std::uint32_t> out;
  out.reserve(doc.size());
  for (const auto& tok : doc) {
    if (auto i = vocab.index_of(tok)) out.push_back(static_cast<std::uint32_t>(*i));
  }
  return out;
}

std::vector<double> idf_weights(const Vocabulary& vocab) {
  std::vector<double> idf(vocab.size());
  const auto n = static_cast<double>(vocab.num_documents());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.document_frequency(i)))) + 1.0;
  }
  return idf;
}

Eigen::MatrixXd tfidf_matrix(std::span<const BowVector> bows, const Vocabulary& vocab) {
  const auto idf = idf_weights(vocab);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(bows.size()),
                                            static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t d = 0; d < bows.size(); ++d) {
    for (const auto& [i, c] : bows[d].counts) {
      m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = static_cast<double>(c) * idf.at(i);
    }
    const double norm = m.row(static_cast<Eigen::Index>(d)).norm();
    if (norm > 0.0) m.row(static_cast<Eigen::Index>(d)) /= norm;
  }
  return m;
}

nlohmann::json to_json(const TokenPipelineConfig& cfg) {
  nlohmann::json j{{"lowercase", cfg.lowercase},
                   {"strip_punctuation", cfg.strip_punctuation},
                   {"remove_numbers", cfg.remove_numbers},
                   {"ngram_range", {cfg.ngram_range.first, cfg.ngram_range.second}},
                   {"code_handling", cfg.code_handling == CodeHandling::drop ? "drop" : "split_identifiers"},
                   {"min_token_len", cfg.min_token_len}};
  if (cfg.stopwords == default_stopwords()) {
    j["stopwords"] = "default";
  } else {
    j["stopwords"] = cfg.stopwords;
  }
  return j;
}

TokenPipelineConfig token_config_from_json(const nlohmann::json& j) {
  auto cfg = TokenPipelineConfig::defaults();
  cfg.lowercase = j.value("lowercase", cfg.lowercase);
  cfg.strip_punctuation = j.value("strip_punctuation", cfg.strip_punctuation);
  cfg.remove_numbers = j.value("remove_numbers", cfg.remove_numbers);
  if (j.contains("ngram_range")) {
    const auto& r = j.at("ngram_range");
    cfg.ngram_range = {r.at(0).get<int>(), r.at(1).get<int>()};
  }
  if (j.contains("code_handling")) {
    const auto mode = j.at("code_handling").get<std::string>();
    if (mode == "drop") {
      cfg.code_handling = CodeHandling::drop;
    } else if (mode == "split_identifiers") {
      cfg.code_handling = CodeHandling::split_identifiers;
    } else {
      throw ArgumentError("unknown code_handling: " + mode);
    }
  }
  cfg.min_token_len = j.value("min_token_len", cfg.min_token_len);
  if (j.contains("stopwords")) {
    const auto& s = j.at("stopwords");
    if (s.is_string()) {
      if (s.get<std::string>() != "default") cfg.stopwords = load_stopwords(s.get<std::string>());
    } else {
      cfg.stopwords = s.get<std::set<std::string>>();
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace bugtriage::text
