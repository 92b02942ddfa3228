#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace itf {

/// The five screening term lists. Loaded from JSON or taken from the built-in
/// annotation-dictionary defaults.
struct Lexicon {
  std::vector<std::string> gate_terms;
  std::vector<std::string> normal_terms;
  std::vector<std::string> nodular_terms;
  std::vector<std::string> nonnodular_terms;
  std::vector<std::string> standalone_nonnodular;

  static Lexicon defaults();
  /// Throws ParseError on malformed JSON and ValidationError when validate() reports problems.
  static Lexicon from_json(std::string_view json);
  std::string to_json() const;

  /// Problems: empty gate list, nodular/non-nodular overlap (compared on normalized tokens).
  std::vector<std::string> validate() const;
};

enum class TermKind {
  Gate,
  Normal,
  Nodular,
  NonNodular,
  Standalone,
  Calcification,
  Location,
  Density,
  Attenuation,
  Enhancement,
  Metabolic,
  QualitativeSize,
  Number,
  Associated,
  Classification,
  Recommendation,
  NegationCue,
};

struct TermInfo {
  TermKind kind = TermKind::Gate;
  std::string subtype;
};

/// Stage-2 vocabulary entry (location, characteristics, recommendations, ...).
struct AttributeTerm {
  std::string_view phrase;
  TermKind kind;
  std::string_view subtype;
};

std::span<const AttributeTerm> attribute_terms();
/// Terms that name a calcification: a characteristic next to a nodule, a finding otherwise.
std::span<const std::string_view> calcification_terms();
std::span<const std::string_view> negation_cues();

/// Cue tokens for metabolic distribution.
std::span<const std::string_view> diffuse_cues();
std::span<const std::string_view> focal_cues();

/// Finding terms participate in the positive/negative call.
constexpr bool is_finding(TermKind k) {
  return k == TermKind::Nodular || k == TermKind::NonNodular || k == TermKind::Standalone || k == TermKind::Calcification;
}

/// Terms a preceding negation cue suppresses.
constexpr bool is_negatable(TermKind k) {
  return is_finding(k) || k == TermKind::Density || k == TermKind::Attenuation || k == TermKind::Enhancement ||
         k == TermKind::Metabolic;
}

}  // namespace itf
