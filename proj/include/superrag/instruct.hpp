#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "superrag/error.hpp"
#include "superrag/retrieval.hpp"
#include "superrag/text.hpp"

namespace superrag {

/// Inputs of the instruct-setup effectiveness score. Suffixed `_im` so they
/// are not confused with the cache controller's learning rate.
struct InstructSetupParams {
  double alpha_im = 1.0;
  double beta_im = 1.0;
  double gamma_im = 1.0;
  double delta_im = 1.0;
  double epsilon_im = 10.0;
  double zeta_im = 10.0;
  double x_im = 1.0;
  double y_im = 1.0;
};

/// IM = (alpha*beta/gamma) * (sqrt(delta) * log_epsilon(zeta)) * (max(x,y)/min(x,y)).
inline double instruct_effectiveness(const InstructSetupParams& p) {
  if (p.gamma_im == 0.0) throw division_by_zero("gamma_im = 0");
  const double lo = std::min(p.x_im, p.y_im);
  const double hi = std::max(p.x_im, p.y_im);
  if (lo == 0.0) throw division_by_zero("min(x_im, y_im) = 0");
  if (p.delta_im < 0.0) throw domain_error("delta_im < 0");
  if (p.zeta_im <= 0.0) throw domain_error("zeta_im <= 0");
  if (p.epsilon_im <= 0.0) throw domain_error("epsilon_im <= 0");
  if (p.epsilon_im == 1.0) throw domain_error("epsilon_im = 1");
  const double scale = p.alpha_im * p.beta_im / p.gamma_im;
  const double log_eps_zeta = std::log(p.zeta_im) / std::log(p.epsilon_im);
  return scale * (std::sqrt(p.delta_im) * log_eps_zeta) * (hi / lo);
}

struct InstructExample {
  std::string instruction;
  std::string response;
};

inline constexpr std::string_view kNoAnswer = "NO_ANSWER";

/// Memorized instruction -> response templates, keyed by the normalized
/// instruction (tokens joined by single spaces).
struct InstructModel {
  std::map<std::string, std::string> templates;
  std::string trained_on;

  const std::string* match(std::string_view raw_query) const {
    auto it = templates.find(join(normalize(raw_query)));
    return it == templates.end() ? nullptr : &it->second;
  }
};

/// Later duplicates of an instruction overwrite earlier ones.
inline InstructModel train_instruct_model(const std::vector<InstructExample>& dataset,
                                          std::string dataset_id = "inline") {
  if (dataset.empty()) throw empty_dataset();
  InstructModel model;
  model.trained_on = std::move(dataset_id);
  for (const auto& ex : dataset) model.templates[join(normalize(ex.instruction))] = ex.response;
  return model;
}

/// Splits after '.', '!' or '?' when followed by whitespace or end of text.
/// Sentences are trimmed; empty ones dropped.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  const auto flush = [&](std::size_t begin, std::size_t end) {
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    if (end > begin) out.emplace_back(text.substr(begin, end - begin));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      flush(start, i + 1);
      start = i + 1;
    }
  }
  flush(start, text.size());
  return out;
}

/// Template answer when some model knows the instruction (last registered
/// model wins), otherwise the sentence sharing the most distinct query terms.
/// Ties go to the lower doc id, then the earlier sentence.
inline std::string generate_response(const std::vector<InstructModel>& models, const Query& query,
                                     std::vector<const Document*> docs) {
  for (auto it = models.rbegin(); it != models.rend(); ++it) {
    if (const auto* tmpl = it->match(query.raw)) return *tmpl;
  }
  std::sort(docs.begin(), docs.end(), [](const Document* a, const Document* b) { return a->id < b->id; });
  const std::set<std::string> qterms(query.terms.begin(), query.terms.end());
  bool found = false;
  std::size_t best_overlap = 0;
  std::string answer;
  for (const auto* doc : docs) {
    for (auto& s : split_sentences(doc->text)) {
      const auto toks = normalize(s);
      const std::set<std::string> sterms(toks.begin(), toks.end());
      std::size_t overlap = 0;
      for (const auto& t : qterms) overlap += sterms.contains(t) ? 1 : 0;
      if (!found || overlap > best_overlap) {
        answer = std::move(s);
        best_overlap = overlap;
        found = true;
      }
    }
  }
  return found ? answer : std::string(kNoAnswer);
}

inline std::string generate_response(const InstructModel& model, const Query& query,
                                     const std::vector<Document>& docs) {
  std::vector<const Document*> ptrs;
  for (const auto& d : docs) ptrs.push_back(&d);
  return generate_response(std::vector<InstructModel>{model}, query, std::move(ptrs));
}

/// Reads `{"instruction": string, "response": string}` lines.
inline std::vector<InstructExample> read_instruct_jsonl(std::istream& in) {
  std::vector<InstructExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw parse_error(lineno, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("instruction") || !j.contains("response") ||
        !j["instruction"].is_string() || !j["response"].is_string())
      throw parse_error(lineno, "expected {\"instruction\": string, \"response\": string}");
    out.push_back({j["instruction"].get<std::string>(), j["response"].get<std::string>()});
  }
  return out;
}

}  // namespace superrag
