#pragma once

#include <limits>
#include <string>
#include <type_traits>
#include <variant>

#include "rumorlab/rng.hpp"

namespace rumorlab {

namespace law {
struct Exponential { double rate; };
struct Weibull { double shape; double scale; };
/// Cauchy(loc, scale) conditioned on [0, inf).
struct TruncatedCauchy { double loc; double scale; };
struct Deterministic { double t0; };
/// eta = +inf: classic Maki-Thompson, no spontaneous stifling.
struct Never {};
/// eta = 0: every spreader stifles the instant it is created.
struct Immediate {};
}  // namespace law

inline constexpr double kNeverTime = std::numeric_limits<double>::infinity();

/// Distribution F of the spontaneous stifling time. Immutable value type.
class StiflingLaw {
 public:
  using Variant = std::variant<law::Exponential, law::Weibull, law::TruncatedCauchy,
                               law::Deterministic, law::Never, law::Immediate>;

  /// Validates parameters; throws Error{InvalidArgument}.
  StiflingLaw(Variant v);  // NOLINT(google-explicit-constructor)
  template <class L>
    requires std::is_constructible_v<Variant, L> && (!std::is_same_v<std::decay_t<L>, Variant>)
  StiflingLaw(L l) : StiflingLaw(Variant(std::move(l))) {}  // NOLINT(google-explicit-constructor)

  double cdf(double t) const;
  /// Defined as 1 - cdf(t), so cdf + survival == 1 holds exactly.
  double survival(double t) const { return 1.0 - cdf(t); }
  /// Inverse-transform draw from one uniform; +inf for Never.
  double sample(Rng& rng) const;
  /// Inverse cdf on (0, 1).
  double quantile(double u) const;

  /// Law of eta / c. Pairs with multiplying the contact rate by c.
  StiflingLaw time_compressed(double c) const;

  bool is_exponential() const { return std::holds_alternative<law::Exponential>(v_); }
  bool is_never() const { return std::holds_alternative<law::Never>(v_); }
  const Variant& variant() const { return v_; }

  std::string describe() const;

 private:
  Variant v_;
};

/// "exponential:1", "weibull:2:5", "cauchy:4:1.4", "deterministic:3.5",
/// "never", "immediate".
StiflingLaw parse_law(const std::string& text);

}  // namespace rumorlab
