#pragma once

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace superrag {

/// Lowercases and splits on every run of non-alphanumeric bytes.
/// Non-ASCII bytes count as separators.
inline std::vector<std::string> normalize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(sep);
    out += tokens[i];
  }
  return out;
}

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = kFnvOffset;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

struct Fingerprint {
  std::uint64_t value = 0;
  auto operator<=>(const Fingerprint&) const = default;
};

/// FNV-1a 64 of the sorted terms joined by single spaces, so term order
/// does not matter but multiplicity does.
inline Fingerprint fingerprint_terms(std::vector<std::string> terms) {
  std::sort(terms.begin(), terms.end());
  return Fingerprint{fnv1a64(join(terms))};
}

struct Query {
  std::string raw;
  std::vector<std::string> terms;
  Fingerprint fingerprint;

  static Query from_text(std::string raw) {
    Query q;
    q.terms = normalize(raw);
    q.fingerprint = fingerprint_terms(q.terms);
    q.raw = std::move(raw);
    return q;
  }
};

}  // namespace superrag

template <>
struct std::hash<superrag::Fingerprint> {
  std::size_t operator()(const superrag::Fingerprint& f) const noexcept {
    return std::hash<std::uint64_t>{}(f.value);
  }
};
