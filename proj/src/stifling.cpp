#include "rumorlab/stifling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "rumorlab/error.hpp"

namespace rumorlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cauchy_cdf(double x) { return 0.5 + std::atan(x) / std::numbers::pi; }

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace

StiflingLaw::StiflingLaw(Variant v) : v_(v) {
  std::visit(Overloaded{
                 [](const law::Exponential& l) {
                   require(std::isfinite(l.rate) && l.rate > 0, "exponential rate must be > 0");
                 },
                 [](const law::Weibull& l) {
                   require(std::isfinite(l.shape) && l.shape > 0, "weibull shape must be > 0");
                   require(std::isfinite(l.scale) && l.scale > 0, "weibull scale must be > 0");
                 },
                 [](const law::TruncatedCauchy& l) {
                   require(std::isfinite(l.loc), "cauchy loc must be finite");
                   require(std::isfinite(l.scale) && l.scale > 0, "cauchy scale must be > 0");
                 },
                 [](const law::Deterministic& l) {
                   require(std::isfinite(l.t0) && l.t0 >= 0, "deterministic time must be >= 0");
                 },
                 [](const law::Never&) {},
                 [](const law::Immediate&) {},
             },
             v_);
}

double StiflingLaw::cdf(double t) const {
  if (t < 0) return 0.0;
  return std::visit(
      Overloaded{
          [t](const law::Exponential& l) { return -std::expm1(-l.rate * t); },
          [t](const law::Weibull& l) { return -std::expm1(-std::pow(t / l.scale, l.shape)); },
          [t](const law::TruncatedCauchy& l) {
            if (std::isinf(t)) return 1.0;
            const double c0 = cauchy_cdf(-l.loc / l.scale);
            const double f = (cauchy_cdf((t - l.loc) / l.scale) - c0) / (1.0 - c0);
            return std::clamp(f, 0.0, 1.0);
          },
          [t](const law::Deterministic& l) { return t >= l.t0 ? 1.0 : 0.0; },
          [](const law::Never&) { return 0.0; },
          [](const law::Immediate&) { return 1.0; },
      },
      v_);
}

double StiflingLaw::quantile(double u) const {
  return std::visit(
      Overloaded{
          [u](const law::Exponential& l) { return -std::log1p(-u) / l.rate; },
          [u](const law::Weibull& l) { return l.scale * std::pow(-std::log1p(-u), 1.0 / l.shape); },
          [u](const law::TruncatedCauchy& l) {
            const double c0 = cauchy_cdf(-l.loc / l.scale);
            const double q = c0 + u * (1.0 - c0);
            return std::max(0.0, l.loc + l.scale * std::tan(std::numbers::pi * (q - 0.5)));
          },
          [](const law::Deterministic& l) { return l.t0; },
          [](const law::Never&) { return kNeverTime; },
          [](const law::Immediate&) { return 0.0; },
      },
      v_);
}

double StiflingLaw::sample(Rng& rng) const {
  // Every variant consumes exactly one uniform so replica streams stay
  // aligned when only the law changes.
  return quantile(rng.uniform());
}

StiflingLaw StiflingLaw::time_compressed(double c) const {
  require(std::isfinite(c) && c > 0, "time compression factor must be > 0");
  return std::visit(
      Overloaded{
          [c](const law::Exponential& l) { return StiflingLaw(law::Exponential{l.rate * c}); },
          [c](const law::Weibull& l) { return StiflingLaw(law::Weibull{l.shape, l.scale / c}); },
          [c](const law::TruncatedCauchy& l) {
            return StiflingLaw(law::TruncatedCauchy{l.loc / c, l.scale / c});
          },
          [c](const law::Deterministic& l) { return StiflingLaw(law::Deterministic{l.t0 / c}); },
          [](const law::Never&) { return StiflingLaw(law::Never{}); },
          [](const law::Immediate&) { return StiflingLaw(law::Immediate{}); },
      },
      v_);
}

std::string StiflingLaw::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const law::Exponential& l) { out << "exponential:" << l.rate; },
                 [&](const law::Weibull& l) { out << "weibull:" << l.shape << ":" << l.scale; },
                 [&](const law::TruncatedCauchy& l) { out << "cauchy:" << l.loc << ":" << l.scale; },
                 [&](const law::Deterministic& l) { out << "deterministic:" << l.t0; },
                 [&](const law::Never&) { out << "never"; },
                 [&](const law::Immediate&) { out << "immediate"; },
             },
             v_);
  return out.str();
}

StiflingLaw parse_law(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw Error(ErrorCode::kParseError, "empty law");
  auto num = [&](std::size_t i) {
    if (i >= parts.size()) throw Error(ErrorCode::kParseError, "law '" + text + "' is missing parameters");
    try {
      std::size_t used = 0;
      const double v = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParseError, "bad number '" + parts[i] + "' in law '" + text + "'");
    }
  };
  auto arity = [&](std::size_t n) {
    if (parts.size() != n + 1)
      throw Error(ErrorCode::kParseError, "law '" + text + "' takes " + std::to_string(n) + " parameter(s)");
  };
  const std::string& name = parts[0];
  if (name == "exponential" || name == "exp") { arity(1); return StiflingLaw(law::Exponential{num(1)}); }
  if (name == "weibull") { arity(2); return StiflingLaw(law::Weibull{num(1), num(2)}); }
  if (name == "cauchy" || name == "truncated_cauchy") {
    arity(2);
    return StiflingLaw(law::TruncatedCauchy{num(1), num(2)});
  }
  if (name == "deterministic") { arity(1); return StiflingLaw(law::Deterministic{num(1)}); }
  if (name == "never") { arity(0); return StiflingLaw(law::Never{}); }
  if (name == "immediate") { arity(0); return StiflingLaw(law::Immediate{}); }
  throw Error(ErrorCode::kParseError, "unknown law '" + name + "'");
}

}  // namespace rumorlab
