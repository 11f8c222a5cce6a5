#include "markov_ruin/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "markov_ruin/errors.hpp"

namespace markov_ruin {

namespace {

struct Value {
  enum class Type { Number, Bool, String, Array };
  Type type = Type::Number;
  std::string text;  // number literal or string contents
  bool flag = false;
  std::vector<Value> items;
  int line = 0;
};

[[noreturn]] void parse_error(int line, const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::ParseError, field, "line " + std::to_string(line) + ": " + msg);
}

class ValueReader {
 public:
  ValueReader(std::string_view text, int line) : s_(text), line_(line) {}

  Value read() {
    Value v = value();
    skip_space();
    if (pos_ != s_.size()) parse_error(line_, "", "unexpected trailing characters '" + std::string(s_.substr(pos_)) + "'");
    return v;
  }

 private:
  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  Value value() {
    skip_space();
    if (pos_ >= s_.size()) parse_error(line_, "", "missing value");
    Value v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      v.type = Value::Type::String;
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size()) parse_error(line_, "", "unterminated string");
        const char d = s_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= s_.size()) parse_error(line_, "", "dangling escape");
          const char e = s_[pos_++];
          if (e == 'n') v.text += '\n';
          else if (e == 't') v.text += '\t';
          else if (e == '"' || e == '\\') v.text += e;
          else parse_error(line_, "", std::string("unsupported escape \\") + e);
        } else {
          v.text += d;
        }
      }
      return v;
    }
    if (c == '[') {
      v.type = Value::Type::Array;
      ++pos_;
      for (;;) {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        v.items.push_back(value());
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
        } else if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return v;
        } else {
          parse_error(line_, "", "expected ',' or ']' in array");
        }
      }
    }
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' && s_[end] != '\t' &&
           s_[end] != '\n' && s_[end] != '\r') {
      ++end;
    }
    const std::string token(s_.substr(pos_, end - pos_));
    pos_ = end;
    if (token == "true" || token == "false") {
      v.type = Value::Type::Bool;
      v.flag = token == "true";
      return v;
    }
    v.type = Value::Type::Number;
    v.text.reserve(token.size());
    for (char ch : token) {
      if (ch != '_') v.text += ch;
    }
    double d = 0.0;
    const char* first = v.text.data();
    const char* last = first + v.text.size();
    if (!v.text.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, d);
    if (res.ec != std::errc() || res.ptr != last || v.text.empty()) parse_error(line_, "", "invalid value '" + token + "'");
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_string) {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

int bracket_depth(const std::string& s) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) ++i;
    else if (s[i] == '"') in_string = !in_string;
    else if (!in_string && s[i] == '[') ++depth;
    else if (!in_string && s[i] == ']') --depth;
  }
  return depth;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const std::set<std::string> kTables{"", "model", "loss", "minorization", "ruin", "solve", "perpetuity", "garch", "hill"};

class Document {
 public:
  explicit Document(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::string table;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.front() == '[' && line.find('=') == std::string::npos) {
        if (line.back() != ']') parse_error(line_no, "", "malformed table header");
        table = trim(line.substr(1, line.size() - 2));
        if (!kTables.count(table)) throw Error(ErrorCode::UnknownKey, table, "line " + std::to_string(line_no) + ": unknown table");
        if (!seen_tables_.insert(table).second) parse_error(line_no, table, "table declared twice");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) parse_error(line_no, "", "expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty() || key.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_") != std::string::npos) {
        parse_error(line_no, key, "invalid key");
      }
      std::string rhs = trim(line.substr(eq + 1));
      const int start_line = line_no;
      while (bracket_depth(rhs) > 0) {
        if (!std::getline(in, raw)) parse_error(start_line, key, "unterminated array");
        ++line_no;
        rhs += "\n" + trim(strip_comment(raw));
      }
      Value v = ValueReader(rhs, start_line).read();
      const std::string field = table.empty() ? key : table + "." + key;
      if (entries_.count(field)) parse_error(start_line, field, "duplicate key");
      entries_.emplace(field, std::move(v));
      order_.push_back(field);
    }
  }

  bool has(const std::string& field) const { return entries_.count(field) > 0; }
  bool has_table(const std::string& table) const { return seen_tables_.count(table) > 0; }

  const Value* find(const std::string& field) {
    const auto it = entries_.find(field);
    if (it == entries_.end()) return nullptr;
    used_.insert(field);
    return &it->second;
  }

  const Value& require(const std::string& field) {
    const Value* v = find(field);
    if (v == nullptr) throw Error(ErrorCode::MissingRequired, field, "required key is missing");
    return *v;
  }

  void reject_unused(const std::string& context) const {
    for (const auto& field : order_) {
      if (!used_.count(field)) {
        throw Error(ErrorCode::UnknownKey, field,
                    "line " + std::to_string(entries_.at(field).line) + ": not a recognised key" + context);
      }
    }
  }

 private:
  std::map<std::string, Value> entries_;
  std::vector<std::string> order_;
  std::set<std::string> used_;
  std::set<std::string> seen_tables_;
};

double as_double(const Value& v, const std::string& field) {
  if (v.type != Value::Type::Number) parse_error(v.line, field, "expected a number");
  const char* first = v.text.data();
  const char* last = first + v.text.size();
  if (*first == '+') ++first;
  double d = 0.0;
  std::from_chars(first, last, d);
  return d;
}

std::uint64_t as_u64(const Value& v, const std::string& field) {
  if (v.type != Value::Type::Number) parse_error(v.line, field, "expected an integer");
  const char* first = v.text.data();
  const char* last = first + v.text.size();
  if (*first == '+') ++first;
  std::uint64_t u = 0;
  const auto res = std::from_chars(first, last, u);
  if (res.ec != std::errc() || res.ptr != last) parse_error(v.line, field, "expected a non-negative integer");
  return u;
}

bool as_bool(const Value& v, const std::string& field) {
  if (v.type != Value::Type::Bool) parse_error(v.line, field, "expected true or false");
  return v.flag;
}

std::string as_string(const Value& v, const std::string& field) {
  if (v.type != Value::Type::String) parse_error(v.line, field, "expected a quoted string");
  return v.text;
}

std::vector<double> as_vector(const Value& v, const std::string& field, bool allow_scalar = false) {
  if (allow_scalar && v.type == Value::Type::Number) return {as_double(v, field)};
  if (v.type != Value::Type::Array) parse_error(v.line, field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(as_double(item, field));
  return out;
}

std::vector<std::vector<double>> as_matrix(const Value& v, const std::string& field) {
  if (v.type != Value::Type::Array) parse_error(v.line, field, "expected an array of rows");
  std::vector<std::vector<double>> out;
  for (const auto& row : v.items) out.push_back(as_vector(row, field));
  return out;
}

template <class F>
void optional_key(Document& doc, const std::string& field, F&& assign) {
  if (const Value* v = doc.find(field)) assign(*v, field);
}

std::size_t positive_count(const Value& v, const std::string& field) {
  const auto u = as_u64(v, field);
  if (u == 0) parse_error(v.line, field, "must be positive");
  return static_cast<std::size_t>(u);
}

void read_model(Document& doc, ModelConfig& m) {
  m.kind = as_string(doc.require("model.kind"), "model.kind");
  const ModelKind kind = parse_model_kind(m.kind);
  const auto num = [&](const char* key, double& out, bool required) {
    const std::string field = std::string("model.") + key;
    if (required) out = as_double(doc.require(field), field);
    else optional_key(doc, field, [&](const Value& v, const std::string& f) { out = as_double(v, f); });
  };
  const auto vec = [&](const char* key, std::vector<double>& out, bool allow_scalar) {
    const std::string field = std::string("model.") + key;
    out = as_vector(doc.require(field), field, allow_scalar);
  };
  switch (kind) {
    case ModelKind::IidLogNormal:
      num("m", m.m, true);
      num("sigma2", m.sigma2, true);
      break;
    case ModelKind::RegimeSwitchLogNormal:
      m.transition = as_matrix(doc.require("model.transition"), "model.transition");
      vec("regime_mu", m.regime_mu, false);
      vec("regime_sigma", m.regime_sigma, false);
      optional_key(doc, "model.ito_correction",
                   [&](const Value& v, const std::string& f) { m.ito_correction = as_bool(v, f); });
      break;
    case ModelKind::Ar1LogReturn:
      num("c", m.c, true);
      num("mu", m.mu, true);
      num("innovation_sd", m.innovation_sd, false);
      break;
    case ModelKind::ArpBlock:
      vec("coeffs", m.coeffs, false);
      num("mu", m.mu, true);
      num("innovation_sd", m.innovation_sd, false);
      optional_key(doc, "model.a_level", [&](const Value& v, const std::string& f) { m.a_level = as_double(v, f); });
      break;
    case ModelKind::SvMixed:
      num("sv_coeff", m.sv_coeff, true);
      num("sv_intercept", m.sv_intercept, false);
      num("sv_sd", m.sv_sd, false);
      num("bank_weight", m.bank_weight, false);
      num("bank_rate", m.bank_rate, false);
      break;
    case ModelKind::Garch11:
    case ModelKind::Garch11RegimeSwitch: {
      const bool single = kind == ModelKind::Garch11;
      if (!single) m.transition = as_matrix(doc.require("model.transition"), "model.transition");
      vec("a0", m.a0, single);
      vec("a1", m.a1, single);
      vec("b1", m.b1, single);
      break;
    }
  }
}

void read_loss(Document& doc, LossSpec& loss, bool garch) {
  if (garch) return;  // B_n = a0; any [loss] key is left unused and rejected
  optional_key(doc, "loss.kind", [&](const Value& v, const std::string& f) { loss.kind = parse_loss_kind(as_string(v, f)); });
  const auto num = [&](const char* key, double& out) {
    optional_key(doc, std::string("loss.") + key, [&](const Value& v, const std::string& f) { out = as_double(v, f); });
  };
  switch (loss.kind) {
    case LossSpec::Kind::Normal:
      num("mean", loss.mean);
      num("sd", loss.sd);
      break;
    case LossSpec::Kind::ShiftedExponential:
      num("rate", loss.rate);
      num("shift", loss.shift);
      break;
    case LossSpec::Kind::Constant:
      num("value", loss.value);
      break;
    case LossSpec::Kind::StateAffine:
      num("intercept", loss.intercept);
      num("slope", loss.slope);
      break;
    case LossSpec::Kind::PerRegime:
      loss.per_regime = as_vector(doc.require("loss.values"), "loss.values");
      break;
  }
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Solve: return "solve";
    case Experiment::Ruin: return "ruin";
    case Experiment::Perpetuity: return "perpetuity";
    case Experiment::Garch: return "garch";
    case Experiment::Verify: return "verify";
    case Experiment::Minorize: return "minorize";
  }
  return "solve";
}

Experiment parse_experiment(std::string_view name) {
  for (auto e : {Experiment::Solve, Experiment::Ruin, Experiment::Perpetuity, Experiment::Garch, Experiment::Verify,
                 Experiment::Minorize}) {
    if (to_string(e) == name) return e;
  }
  throw Error(ErrorCode::ParseError, "experiment", "unknown experiment '" + std::string(name) + "'");
}

RunConfig parse_config(std::string_view text, std::optional<Experiment> experiment) {
  Document doc(text);
  RunConfig c;

  if (const Value* v = doc.find("experiment")) {
    const std::string name = as_string(*v, "experiment");
    try {
      c.experiment = parse_experiment(name);
    } catch (const Error&) {
      parse_error(v->line, "experiment", "unknown experiment '" + name + "'");
    }
  } else if (!experiment) {
    throw Error(ErrorCode::MissingRequired, "experiment", "required key is missing");
  }
  if (experiment) c.experiment = *experiment;

  c.seed = as_u64(doc.require("seed"), "seed");
  optional_key(doc, "n_paths", [&](const Value& v, const std::string& f) { c.n_paths = positive_count(v, f); });
  optional_key(doc, "horizon", [&](const Value& v, const std::string& f) { c.horizon = positive_count(v, f); });
  optional_key(doc, "n_cycles", [&](const Value& v, const std::string& f) { c.n_cycles = positive_count(v, f); });
  optional_key(doc, "output_dir", [&](const Value& v, const std::string& f) { c.output_dir = as_string(v, f); });

  read_model(doc, c.model);
  const ModelKind kind = parse_model_kind(c.model.kind);
  const bool garch = kind == ModelKind::Garch11 || kind == ModelKind::Garch11RegimeSwitch;
  read_loss(doc, c.model.loss, garch);

  optional_key(doc, "minorization.a_level", [&](const Value& v, const std::string& f) {
    c.minorization.a_level = as_double(v, f);
    if (!(*c.minorization.a_level > 0.0)) parse_error(v.line, f, "must be > 0");
  });
  optional_key(doc, "minorization.delta", [&](const Value& v, const std::string& f) {
    c.minorization.delta = as_double(v, f);
    if (!(*c.minorization.delta > 0.0 && *c.minorization.delta <= 1.0)) parse_error(v.line, f, "must lie in (0, 1]");
  });
  optional_key(doc, "minorization.n_states", [&](const Value& v, const std::string& f) { c.minorization.n_states = positive_count(v, f); });
  optional_key(doc, "minorization.n_sets", [&](const Value& v, const std::string& f) { c.minorization.n_sets = positive_count(v, f); });

  optional_key(doc, "ruin.u_grid", [&](const Value& v, const std::string& f) {
    c.ruin.u_grid = as_vector(v, f);
    for (std::size_t i = 0; i < c.ruin.u_grid.size(); ++i) {
      if (!(c.ruin.u_grid[i] > 0.0) || (i > 0 && !(c.ruin.u_grid[i] > c.ruin.u_grid[i - 1]))) {
        parse_error(v.line, f, "grid must be positive and strictly ascending");
      }
    }
  });
  optional_key(doc, "ruin.q_lo", [&](const Value& v, const std::string& f) { c.ruin.q_lo = as_double(v, f); });
  optional_key(doc, "ruin.q_hi", [&](const Value& v, const std::string& f) { c.ruin.q_hi = as_double(v, f); });
  if (!(c.ruin.q_lo > 0.0 && c.ruin.q_lo < c.ruin.q_hi && c.ruin.q_hi < 1.0)) {
    throw Error(ErrorCode::ParseError, "ruin.q_lo", "quantile window needs 0 < q_lo < q_hi < 1");
  }
  optional_key(doc, "ruin.grid_points", [&](const Value& v, const std::string& f) {
    c.ruin.grid_points = positive_count(v, f);
    if (c.ruin.grid_points < 2) parse_error(v.line, f, "need at least two points");
  });
  optional_key(doc, "ruin.dump_samples", [&](const Value& v, const std::string& f) { c.ruin.dump_samples = as_bool(v, f); });

  optional_key(doc, "solve.cgf_steps", [&](const Value& v, const std::string& f) { c.solve.cgf_steps = positive_count(v, f); });
  optional_key(doc, "solve.cgf_paths", [&](const Value& v, const std::string& f) {
    c.solve.cgf_paths = positive_count(v, f);
    if (c.solve.cgf_paths < 2) parse_error(v.line, f, "need at least two paths");
  });
  optional_key(doc, "solve.truncation_m", [&](const Value& v, const std::string& f) {
    c.solve.truncation_m = as_double(v, f);
    if (!(*c.solve.truncation_m > 0.0)) parse_error(v.line, f, "must be > 0");
  });
  optional_key(doc, "solve.kernel_half_width", [&](const Value& v, const std::string& f) {
    c.solve.kernel_half_width = as_double(v, f);
    if (!(c.solve.kernel_half_width > 0.0)) parse_error(v.line, f, "must be > 0");
  });
  optional_key(doc, "solve.kernel_points", [&](const Value& v, const std::string& f) {
    c.solve.kernel_points = positive_count(v, f);
    if (c.solve.kernel_points < 2) parse_error(v.line, f, "need at least two points");
  });
  optional_key(doc, "solve.bootstrap", [&](const Value& v, const std::string& f) { c.solve.bootstrap = positive_count(v, f); });
  optional_key(doc, "solve.alpha_grid", [&](const Value& v, const std::string& f) {
    c.solve.alpha_grid = as_vector(v, f);
    if (!std::is_sorted(c.solve.alpha_grid.begin(), c.solve.alpha_grid.end())) parse_error(v.line, f, "grid must be ascending");
  });

  optional_key(doc, "perpetuity.tol", [&](const Value& v, const std::string& f) {
    c.perpetuity_tol = as_double(v, f);
    if (!(c.perpetuity_tol > 0.0 && c.perpetuity_tol <= 1e-6)) parse_error(v.line, f, "must lie in (0, 1e-6]");
  });
  optional_key(doc, "garch.burn_in", [&](const Value& v, const std::string& f) { c.garch_burn_in = positive_count(v, f); });
  optional_key(doc, "hill.k", [&](const Value& v, const std::string& f) { c.hill_k = positive_count(v, f); });

  doc.reject_unused(" for model kind " + c.model.kind);
  return c;
}

namespace {

std::string num(double v) {
  // shortest text that parses back to the same double
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string vec(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') out += "\\n";
    else if (c == '\t') out += "\\t";
    else out += c;
  }
  return out + "\"";
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  const ModelConfig& m = c.model;
  o << "experiment = " << quoted(std::string(to_string(c.experiment))) << "\n";
  o << "seed = " << c.seed << "\n";
  o << "n_paths = " << c.n_paths << "\n";
  o << "horizon = " << c.horizon << "\n";
  o << "n_cycles = " << c.n_cycles << "\n";
  o << "output_dir = " << quoted(c.output_dir) << "\n";

  o << "\n[model]\nkind = " << quoted(m.kind) << "\n";
  const ModelKind kind = parse_model_kind(m.kind);
  switch (kind) {
    case ModelKind::IidLogNormal:
      o << "m = " << num(m.m) << "\nsigma2 = " << num(m.sigma2) << "\n";
      break;
    case ModelKind::RegimeSwitchLogNormal: {
      o << "transition = [";
      for (std::size_t i = 0; i < m.transition.size(); ++i) o << (i ? ", " : "") << vec(m.transition[i]);
      o << "]\nregime_mu = " << vec(m.regime_mu) << "\nregime_sigma = " << vec(m.regime_sigma) << "\n";
      o << "ito_correction = " << (m.ito_correction ? "true" : "false") << "\n";
      break;
    }
    case ModelKind::Ar1LogReturn:
      o << "c = " << num(m.c) << "\nmu = " << num(m.mu) << "\ninnovation_sd = " << num(m.innovation_sd) << "\n";
      break;
    case ModelKind::ArpBlock:
      o << "coeffs = " << vec(m.coeffs) << "\nmu = " << num(m.mu) << "\ninnovation_sd = " << num(m.innovation_sd) << "\n";
      if (m.a_level) o << "a_level = " << num(*m.a_level) << "\n";
      break;
    case ModelKind::SvMixed:
      o << "sv_coeff = " << num(m.sv_coeff) << "\nsv_intercept = " << num(m.sv_intercept) << "\nsv_sd = " << num(m.sv_sd)
        << "\nbank_weight = " << num(m.bank_weight) << "\nbank_rate = " << num(m.bank_rate) << "\n";
      break;
    case ModelKind::Garch11:
      o << "a0 = " << (m.a0.size() == 1 ? num(m.a0[0]) : vec(m.a0)) << "\n";
      o << "a1 = " << (m.a1.size() == 1 ? num(m.a1[0]) : vec(m.a1)) << "\n";
      o << "b1 = " << (m.b1.size() == 1 ? num(m.b1[0]) : vec(m.b1)) << "\n";
      break;
    case ModelKind::Garch11RegimeSwitch: {
      o << "transition = [";
      for (std::size_t i = 0; i < m.transition.size(); ++i) o << (i ? ", " : "") << vec(m.transition[i]);
      o << "]\na0 = " << vec(m.a0) << "\na1 = " << vec(m.a1) << "\nb1 = " << vec(m.b1) << "\n";
      break;
    }
  }

  if (kind != ModelKind::Garch11 && kind != ModelKind::Garch11RegimeSwitch) {
    const LossSpec& l = m.loss;
    o << "\n[loss]\nkind = " << quoted(std::string(to_string(l.kind))) << "\n";
    switch (l.kind) {
      case LossSpec::Kind::Normal: o << "mean = " << num(l.mean) << "\nsd = " << num(l.sd) << "\n"; break;
      case LossSpec::Kind::ShiftedExponential: o << "rate = " << num(l.rate) << "\nshift = " << num(l.shift) << "\n"; break;
      case LossSpec::Kind::Constant: o << "value = " << num(l.value) << "\n"; break;
      case LossSpec::Kind::StateAffine: o << "intercept = " << num(l.intercept) << "\nslope = " << num(l.slope) << "\n"; break;
      case LossSpec::Kind::PerRegime: o << "values = " << vec(l.per_regime) << "\n"; break;
    }
  }

  o << "\n[minorization]\n";
  if (c.minorization.a_level) o << "a_level = " << num(*c.minorization.a_level) << "\n";
  if (c.minorization.delta) o << "delta = " << num(*c.minorization.delta) << "\n";
  o << "n_states = " << c.minorization.n_states << "\nn_sets = " << c.minorization.n_sets << "\n";

  o << "\n[ruin]\n";
  if (!c.ruin.u_grid.empty()) o << "u_grid = " << vec(c.ruin.u_grid) << "\n";
  o << "q_lo = " << num(c.ruin.q_lo) << "\nq_hi = " << num(c.ruin.q_hi) << "\ngrid_points = " << c.ruin.grid_points
    << "\ndump_samples = " << (c.ruin.dump_samples ? "true" : "false") << "\n";

  o << "\n[solve]\ncgf_steps = " << c.solve.cgf_steps << "\ncgf_paths = " << c.solve.cgf_paths << "\n";
  if (c.solve.truncation_m) o << "truncation_m = " << num(*c.solve.truncation_m) << "\n";
  o << "kernel_half_width = " << num(c.solve.kernel_half_width) << "\nkernel_points = " << c.solve.kernel_points
    << "\nbootstrap = " << c.solve.bootstrap << "\n";
  if (!c.solve.alpha_grid.empty()) o << "alpha_grid = " << vec(c.solve.alpha_grid) << "\n";

  o << "\n[perpetuity]\ntol = " << num(c.perpetuity_tol) << "\n";
  o << "\n[garch]\nburn_in = " << c.garch_burn_in << "\n";
  o << "\n[hill]\nk = " << c.hill_k << "\n";
  return o.str();
}

std::string config_text_from_manifest(std::string_view manifest_json) {
  try {
    const auto j = nlohmann::json::parse(manifest_json);
    return j.at("config").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "manifest", std::string("cannot read config from manifest: ") + e.what());
  }
}

}  // namespace markov_ruin
