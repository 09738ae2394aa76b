#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "isslyap/admissibility.hpp"
#include "isslyap/errors.hpp"
#include "isslyap/lyapunov.hpp"
#include "isslyap/model_zoo.hpp"
#include "isslyap/operator_core.hpp"

namespace isslyap::io {

using json = nlohmann::ordered_json;

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// JSON cannot carry inf/nan; they become strings so no value is silently lost.
inline json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(number(m(i, j)));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Vector vector_from_json(const json& j, std::string_view what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + ": expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(std::string(what) + ": entry " + std::to_string(i) + " is not a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline Matrix matrix_from_json(const json& j, std::string_view what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw InvalidArgument(std::string(what) + ": expected a nonempty array of rows");
  }
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw InvalidArgument(std::string(what) + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw InvalidArgument(std::string(what) + ": non-numeric entry");
      m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

struct ModelRef {
  std::string name;
};
struct RuleSpec {
  std::string eigenvalue_rule;
  std::string coeff_rule;
  std::string label = "custom-rule";
};
struct ArraySpec {
  Vector eigenvalues;
  Vector input_coeffs;
  std::string label = "spectral";
};
struct MatrixSpec {
  Matrix a;
  Matrix b;
  std::string label = "matrix";
};
using SystemSpec = std::variant<ModelRef, RuleSpec, ArraySpec, MatrixSpec>;

/// {"type":"spectral", "eigenvalues"|"eigenvalue_rule", "input_coeffs"|"coeff_rule", "modes"}
/// or {"type":"matrix", "a", "b"}; a bare string names a zoo model.
inline SystemSpec parse_system_spec(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    describe_model(name, 1);
    return ModelRef{name};
  }
  if (!j.is_object()) throw InvalidArgument("system: expected an object or a model name");
  const std::string type = j.value("type", "");
  const std::string label = j.value("label", type == "matrix" ? "matrix" : "spectral");
  if (type == "matrix") {
    if (!j.contains("a") || !j.contains("b")) throw InvalidArgument("matrix system needs \"a\" and \"b\"");
    MatrixSpec m{matrix_from_json(j["a"], "a"), matrix_from_json(j["b"], "b"), label};
    MatrixSystem(m.a, m.b, m.label);  // validate
    return m;
  }
  if (type != "spectral") throw InvalidArgument("system: \"type\" must be \"spectral\" or \"matrix\"");
  const bool er = j.contains("eigenvalue_rule");
  const bool cr = j.contains("coeff_rule");
  if (er != cr) throw InvalidArgument("spectral system: give both rules or neither");
  if (er) {
    RuleSpec r{j["eigenvalue_rule"].get<std::string>(), j["coeff_rule"].get<std::string>(),
               j.value("label", "custom-rule")};
    RuleExpression{r.eigenvalue_rule};  // reject malformed rules at parse time
    RuleExpression{r.coeff_rule};
    return r;
  }
  if (!j.contains("eigenvalues") || !j.contains("input_coeffs")) {
    throw InvalidArgument("spectral system needs eigenvalues/input_coeffs or eigenvalue_rule/coeff_rule");
  }
  ArraySpec a{vector_from_json(j["eigenvalues"], "eigenvalues"), vector_from_json(j["input_coeffs"], "input_coeffs"),
              label};
  SpectralSystem(a.eigenvalues, a.input_coeffs, a.label);  // validate
  return a;
}

inline bool is_spectral(const SystemSpec& s) { return !std::holds_alternative<MatrixSpec>(s); }

inline std::string spec_label(const SystemSpec& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ModelRef>) {
          return v.name;
        } else {
          return v.label;
        }
      },
      s);
}

/// The N-mode truncation of a spectral spec. Explicit arrays can only be truncated.
inline SpectralSystem spectral_truncation(const SystemSpec& s, Index modes) {
  if (const auto* m = std::get_if<ModelRef>(&s)) return make_model(m->name, modes);
  if (const auto* r = std::get_if<RuleSpec>(&s)) return custom_rule_system(r->eigenvalue_rule, r->coeff_rule, modes, r->label);
  if (const auto* a = std::get_if<ArraySpec>(&s)) {
    if (modes < 1 || modes > a->eigenvalues.size()) {
      throw InvalidArgument("explicit spectral system has " + std::to_string(a->eigenvalues.size()) +
                            " modes; cannot truncate to " + std::to_string(modes));
    }
    return SpectralSystem(a->eigenvalues.head(modes), a->input_coeffs.head(modes), a->label);
  }
  throw InvalidArgument("matrix systems have no spectral truncation");
}

inline SystemFamily family_of(const SystemSpec& s) {
  return [s](Index n) { return spectral_truncation(s, n); };
}

inline MatrixSystem matrix_system_of(const SystemSpec& s) {
  const auto& m = std::get<MatrixSpec>(s);
  return MatrixSystem(m.a, m.b, m.label);
}

inline json to_json(const ModelDescriptor& d) {
  return json{{"type", "spectral"},     {"label", d.name},       {"eigenvalue_rule", d.eigenvalue_rule},
              {"coeff_rule", d.coeff_rule}, {"modes", d.modes}, {"note", d.note}};
}

inline json to_json(const QuadraticForm& f) {
  json j;
  if (f.is_diagonal()) {
    j["kind"] = "diagonal";
    j["weights"] = to_json(f.weights());
  } else {
    j["kind"] = "dense";
    j["p"] = to_json(f.matrix());
  }
  j["provenance"] = f.provenance();
  if (f.generator_power()) j["generator_power"] = *f.generator_power();
  return j;
}

inline QuadraticForm form_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  const std::string prov = j.value("provenance", "");
  std::optional<double> power;
  if (j.contains("generator_power")) power = j["generator_power"].get<double>();
  if (kind == "diagonal") return QuadraticForm::diagonal(vector_from_json(j.at("weights"), "weights"), prov, power);
  if (kind == "dense") return QuadraticForm::dense(matrix_from_json(j.at("p"), "p"), prov, power);
  throw InvalidArgument("form: \"kind\" must be \"diagonal\" or \"dense\"");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("'" + path + "': " + e.what());
  }
}

/// Writes '.'-decimal CSV with LF line endings; doubles in shortest round-trip form.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw InvalidArgument("cannot write '" + path + "'");
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    (write_cell(cells, first), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  template <class T>
  void write_cell(const T& v, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_floating_point_v<T>) {
      out_ << format_double(v);
    } else {
      out_ << v;
    }
  }

  std::ofstream out_;
};

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace isslyap::io
