#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "fixcert/expr.hpp"

namespace fixcert {

/// Which integral contractive inequality is being checked:
///   branciari — comparison distance d(x, y)
///   rhoades   — maximal term m(x, y)
///   moradi    — maximal term m'(Tx, Ty) with lhs distance d(TSx, TSy)
enum class ConditionKind { Branciari, Rhoades, Moradi };

inline constexpr std::string_view to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::Branciari: return "branciari";
    case ConditionKind::Rhoades: return "rhoades";
    case ConditionKind::Moradi: return "moradi";
  }
  return "?";
}

inline std::optional<ConditionKind> condition_kind_from(std::string_view name) {
  if (name == "branciari") return ConditionKind::Branciari;
  if (name == "rhoades") return ConditionKind::Rhoades;
  if (name == "moradi") return ConditionKind::Moradi;
  return std::nullopt;
}

class ConditionPreset {
 public:
  ConditionPreset(ConditionKind kind, double k, RealMap t)
      : kind_(kind), k_(k), t_(std::move(t)) {
    if (!(k_ >= 0.0 && k_ < 1.0))
      throw std::invalid_argument("condition preset: k must lie in [0, 1)");
    if (kind_ != ConditionKind::Moradi && !t_.is_identity())
      throw std::invalid_argument("condition preset: " + std::string(to_string(kind_)) +
                                  " requires the identity T");
  }

  static ConditionPreset branciari(double k) {
    return ConditionPreset(ConditionKind::Branciari, k, identity_map());
  }
  static ConditionPreset rhoades(double k) {
    return ConditionPreset(ConditionKind::Rhoades, k, identity_map());
  }
  static ConditionPreset moradi(double k, RealMap t) {
    return ConditionPreset(ConditionKind::Moradi, k, std::move(t));
  }

  ConditionKind kind() const noexcept { return kind_; }
  double k() const noexcept { return k_; }
  const RealMap& t_map() const noexcept { return t_; }

 private:
  ConditionKind kind_;
  double k_;
  RealMap t_;
};

}  // namespace fixcert
