#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isslyap/errors.hpp"
#include "isslyap/operator_core.hpp"
#include "isslyap/rule_expr.hpp"

namespace isslyap {

enum class Boundary { dirichlet, neumann };

/// Heat equation on (0,1) in modal coordinates with scalar boundary input at
/// xi = 1. Dirichlet: sine basis, input through the boundary lift.
/// Neumann: flux input, with a Dirichlet condition at xi = 0.
inline SpectralSystem heat_system(Boundary boundary, Index modes) {
  if (modes < 1) throw InvalidArgument("heat_system: need at least one mode");
  Vector lambda(modes), b(modes);
  constexpr double pi = std::numbers::pi;
  for (Index i = 0; i < modes; ++i) {
    const double n = static_cast<double>(i + 1);
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    if (boundary == Boundary::dirichlet) {
      lambda(i) = (n * pi) * (n * pi);
      b(i) = std::numbers::sqrt2 * n * pi * sign;
    } else {
      lambda(i) = ((n - 0.5) * pi) * ((n - 0.5) * pi);
      b(i) = std::numbers::sqrt2 * sign;
    }
  }
  return SpectralSystem(std::move(lambda), std::move(b),
                        boundary == Boundary::dirichlet ? "heat-dirichlet" : "heat-neumann");
}

inline constexpr Index kCounterexampleMaxModes = 1000;

/// lambda_n = 2^n, b_n = 2^{n/2}, n = 1..N. B is 2-admissible but
/// (-A)^{-1/2} B = (1, 1, ...) is not in the state space.
inline SpectralSystem counterexample_system(Index modes) {
  if (modes < 1) throw InvalidArgument("counterexample_system: need at least one mode");
  if (modes > kCounterexampleMaxModes) {
    throw OverflowRefusal("counterexample_system: 2^N overflows double precision for N > " +
                          std::to_string(kCounterexampleMaxModes));
  }
  Vector lambda(modes), b(modes);
  for (Index i = 0; i < modes; ++i) {
    const int n = static_cast<int>(i + 1);
    lambda(i) = std::ldexp(1.0, n);
    b(i) = (n % 2 == 0) ? std::ldexp(1.0, n / 2) : std::ldexp(std::numbers::sqrt2, (n - 1) / 2);
  }
  return SpectralSystem(std::move(lambda), std::move(b), "counterexample");
}

inline constexpr double kRuleMagnitudeLimit = 1e12;

inline Vector evaluate_rule(const RuleExpression& rule, Index modes, std::string_view what) {
  Vector out(modes);
  for (Index i = 0; i < modes; ++i) {
    const double v = rule(static_cast<long long>(i + 1));
    if (!std::isfinite(v) || std::abs(v) > kRuleMagnitudeLimit) {
      throw OverflowRefusal(std::string(what) + " rule '" + rule.source() + "' leaves the safe range at n=" +
                            std::to_string(i + 1));
    }
    out(i) = v;
  }
  return out;
}

/// Diagonal system from rule strings in n, evaluated for n = 1..N.
inline SpectralSystem custom_rule_system(std::string_view eigenvalue_rule, std::string_view coeff_rule, Index modes,
                                         std::string label = "custom-rule") {
  if (modes < 1) throw InvalidArgument("custom_rule_system: need at least one mode");
  const RuleExpression er(eigenvalue_rule);
  const RuleExpression cr(coeff_rule);
  Vector lambda = evaluate_rule(er, modes, "eigenvalue");
  Vector b = evaluate_rule(cr, modes, "coefficient");
  for (Index i = 0; i < modes; ++i) {
    if (!(lambda(i) > 0.0)) {
      throw InvalidSystem("custom_rule_system: eigenvalue rule gives " + std::to_string(lambda(i)) +
                          " <= 0 at n=" + std::to_string(i + 1));
    }
  }
  return SpectralSystem(std::move(lambda), std::move(b), std::move(label));
}

struct ModelDescriptor {
  std::string name;  // heat-dirichlet | heat-neumann | counterexample | custom-rule
  Index modes = 0;
  std::string note;
  std::string eigenvalue_rule;  // the equivalent rules, for config round trips
  std::string coeff_rule;
};

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names{"heat-dirichlet", "heat-neumann", "counterexample"};
  return names;
}

inline ModelDescriptor describe_model(std::string_view name, Index modes) {
  if (name == "heat-dirichlet") {
    return {"heat-dirichlet", modes, "1-D heat equation, Dirichlet boundary input; only p-admissible for p > 4",
            "(n*pi)^2", "sqrt(2)*n*pi*(-1)^(n+1)"};
  }
  if (name == "heat-neumann") {
    return {"heat-neumann", modes, "1-D heat equation, Neumann boundary input; B maps into X_{-1/2}",
            "((n-0.5)*pi)^2", "sqrt(2)*(-1)^(n+1)"};
  }
  if (name == "counterexample") {
    return {"counterexample", modes, "lambda_n = 2^n, b_n = 2^{n/2}: 2-admissible, not in X_{-1/2}", "2^n",
            "2^(n/2)"};
  }
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

inline SpectralSystem make_model(std::string_view name, Index modes) {
  if (name == "heat-dirichlet") return heat_system(Boundary::dirichlet, modes);
  if (name == "heat-neumann") return heat_system(Boundary::neumann, modes);
  if (name == "counterexample") return counterexample_system(modes);
  throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

}  // namespace isslyap
