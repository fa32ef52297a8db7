#ifndef PUBDP_BUDGET_HPP
#define PUBDP_BUDGET_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pubdp/errors.hpp"

namespace pubdp {

enum class BudgetKind { kZCDP, kApproxDP };

/// Tagged privacy budget: either zCDP(rho) or approximate DP (eps, delta).
/// Composition of zCDP budgets is additive in rho; approximate-DP budgets
/// compose basically (sums) with an advanced-composition variant exposed
/// separately. Kinds never mix silently.
struct PrivacyBudget {
  BudgetKind kind = BudgetKind::kZCDP;
  double rho = 0.0;
  double eps = 0.0;
  double delta = 0.0;

  static PrivacyBudget Zcdp(double rho) {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ParameterError("zCDP rho must be finite and >= 0");
    PrivacyBudget b;
    b.kind = BudgetKind::kZCDP;
    b.rho = rho;
    return b;
  }

  static PrivacyBudget Approx(double eps, double delta) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ParameterError("eps must be finite and >= 0");
    if (!(delta >= 0.0 && delta < 1.0)) throw ParameterError("delta must lie in [0,1)");
    PrivacyBudget b;
    b.kind = BudgetKind::kApproxDP;
    b.eps = eps;
    b.delta = delta;
    return b;
  }

  /// Linear slice of this budget (basic composition semantics: f of the rho,
  /// or f of both eps and delta). Used to hand out halves/quarters of a
  /// declared budget inside pipelines.
  [[nodiscard]] PrivacyBudget fraction(std::uint64_t num, std::uint64_t den) const {
    if (den == 0) throw ParameterError("fraction denominator must be positive");
    const double f = static_cast<double>(num) / static_cast<double>(den);
    if (kind == BudgetKind::kZCDP) return Zcdp(rho * f);
    return Approx(eps * f, delta * f);
  }

  /// The epsilon at which a pure-DP primitive (Laplace counting) may run:
  /// zCDP rho converts as eps = sqrt(2*rho); approx budgets use eps directly.
  [[nodiscard]] double as_pure_eps() const {
    return kind == BudgetKind::kZCDP ? std::sqrt(2.0 * rho) : eps;
  }
};

/// Sequential composition: zCDP adds rho; approx DP adds eps and delta.
inline PrivacyBudget compose(const std::vector<PrivacyBudget>& budgets) {
  if (budgets.empty()) throw ParameterError("compose: empty budget list");
  const BudgetKind kind = budgets.front().kind;
  double rho = 0.0, eps = 0.0, delta = 0.0;
  for (const auto& b : budgets) {
    if (b.kind != kind) throw ParameterError("compose: mixed budget kinds (convert explicitly)");
    rho += b.rho;
    eps += b.eps;
    delta += b.delta;
  }
  return kind == BudgetKind::kZCDP ? PrivacyBudget::Zcdp(rho) : PrivacyBudget::Approx(eps, delta);
}

/// Advanced composition for T approx-DP mechanisms each (eps0, delta0_each):
/// total eps = eps0 * sqrt(6*T*ln(1/delta0)) at added slack delta0.
inline PrivacyBudget compose_advanced(double eps0, double delta_each, std::size_t T,
                                      double delta0) {
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw ParameterError("compose_advanced: delta0 in (0,1)");
  const double eps = eps0 * std::sqrt(6.0 * static_cast<double>(T) * std::log(1.0 / delta0));
  return PrivacyBudget::Approx(eps, delta_each * static_cast<double>(T) + delta0);
}

/// Even split into `parts` slices. zCDP: rho/parts each. Approx DP: each part
/// gets (eps / sqrt(6*parts*ln(2/delta)), delta/(2*parts)), reserving delta/2
/// of the slack for the advanced recomposition.
inline std::vector<PrivacyBudget> split_budget(const PrivacyBudget& total, std::size_t parts) {
  if (parts == 0) throw ParameterError("split_budget: parts must be >= 1");
  std::vector<PrivacyBudget> out;
  out.reserve(parts);
  if (total.kind == BudgetKind::kZCDP) {
    for (std::size_t i = 0; i < parts; ++i) out.push_back(PrivacyBudget::Zcdp(total.rho / parts));
    return out;
  }
  if (!(total.delta > 0.0)) throw ParameterError("split_budget: approx split needs delta > 0");
  const double eps_part =
      total.eps / std::sqrt(6.0 * static_cast<double>(parts) * std::log(2.0 / total.delta));
  const double delta_part = total.delta / (2.0 * static_cast<double>(parts));
  for (std::size_t i = 0; i < parts; ++i) out.push_back(PrivacyBudget::Approx(eps_part, delta_part));
  return out;
}

/// Instrumented accountant. A pipeline declares its total budget once and
/// charges exact fractions (num/den in integer arithmetic) as it hands slices
/// to mechanisms; disjoint-data parallel composition charges its fraction
/// once, not per shard. The spent-vs-declared comparison is exact: no
/// floating-point accumulation is involved.
class BudgetAccountant {
 public:
  explicit BudgetAccountant(PrivacyBudget declared) : declared_(declared) {}

  /// Charge num/den of the declared budget and return that slice.
  PrivacyBudget charge(std::uint64_t num, std::uint64_t den) {
    if (den == 0) throw ParameterError("accountant: zero denominator");
    add_fraction(num, den);
    return declared_.fraction(num, den);
  }

  /// Spent fraction <= 1, exactly.
  [[nodiscard]] bool within_declared() const { return num_ <= den_; }

  [[nodiscard]] double spent_fraction() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  [[nodiscard]] std::uint64_t spent_num() const { return num_; }
  [[nodiscard]] std::uint64_t spent_den() const { return den_; }
  [[nodiscard]] const PrivacyBudget& declared() const { return declared_; }

 private:
  void add_fraction(std::uint64_t num, std::uint64_t den) {
    // num_/den_ += num/den over unsigned 128-bit intermediates, reduced by gcd.
    const std::uint64_t g = std::gcd(den_, den);
    const unsigned __int128 lcm = static_cast<unsigned __int128>(den_) / g * den;
    const unsigned __int128 sum = static_cast<unsigned __int128>(num_) * (lcm / den_) +
                                  static_cast<unsigned __int128>(num) * (lcm / den);
    unsigned __int128 nn = sum, dd = lcm;
    const unsigned __int128 gg = gcd128(nn, dd);
    nn /= gg;
    dd /= gg;
    if (nn > UINT64_MAX || dd > UINT64_MAX)
      throw ParameterError("accountant: fraction overflow");
    num_ = static_cast<std::uint64_t>(nn);
    den_ = static_cast<std::uint64_t>(dd);
  }

  static unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
      const unsigned __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  PrivacyBudget declared_;
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
};

}  // namespace pubdp

#endif  // PUBDP_BUDGET_HPP
