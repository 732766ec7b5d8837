#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "pmllab/errors.hpp"
#include "pmllab/verify.hpp"

namespace pmllab {

namespace {

std::string number(double v) { return fmt::format("{:.17g}", v); }

double parse_number(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    throw ParseError(fmt::format("line {}: '{}' is not a number", line, s));
  }
}

void check_key(const std::string& key) {
  if (key.empty() || key.find(':') != std::string::npos || key.find('\n') != std::string::npos) {
    throw std::invalid_argument(fmt::format("report key '{}' must be non-empty without ':' or newlines", key));
  }
}

}  // namespace

CheckReport::CheckReport(std::string name, const CheckOptions& opts)
    : name_(std::move(name)), tolerance_scale_(opts.tolerance_scale) {
  check_key(name_);
  parameter("seed", std::to_string(opts.seed));
  parameter("tolerance_scale", opts.tolerance_scale);
}

void CheckReport::parameter(const std::string& key, const std::string& value) {
  check_key(key);
  parameters_.emplace_back(key, value);
}

void CheckReport::parameter(const std::string& key, double value) { parameter(key, number(value)); }

void CheckReport::parameter(const std::string& key, cplx value) {
  parameter(key, fmt::format("{:.17g}{:+.17g}i", value.real(), value.imag()));
}

bool CheckReport::add(const std::string& criterion, double value, const std::string& relation, double bound,
                      bool pass) {
  check_key(criterion);
  verdicts_.push_back({criterion, value, relation, bound, pass && std::isfinite(value)});
  return verdicts_.back().pass;
}

bool CheckReport::require_small(const std::string& criterion, double value, double tol) {
  const double bound = tol * tolerance_scale_;
  return add(criterion, value, "<=", bound, value <= bound);
}

bool CheckReport::require_at_most(const std::string& criterion, double value, double bound) {
  return add(criterion, value, "<=", bound, value <= bound);
}

bool CheckReport::require_at_least(const std::string& criterion, double value, double bound) {
  return add(criterion, value, ">=", bound, value >= bound);
}

bool CheckReport::require_positive(const std::string& criterion, double value) {
  return add(criterion, value, ">", 0.0, value > 0.0);
}

bool CheckReport::require_below(const std::string& criterion, double value, double bound) {
  return add(criterion, value, "<", bound, value < bound);
}

void CheckReport::merge(const CheckReport& other, const std::string& prefix) {
  for (const auto& [k, v] : other.measured_) measured_.emplace_back(prefix + k, v);
  for (const auto& [k, v] : other.constants_) constants_.emplace_back(prefix + k, v);
  for (const auto& [k, v] : other.orders_) orders_.emplace_back(prefix + k, v);
  for (Verdict v : other.verdicts_) {
    v.criterion = prefix + v.criterion;
    verdicts_.push_back(v);
  }
  for (const auto& n : other.notes_) notes_.push_back(prefix + n);
  for (const auto& [k, t] : other.tables_) tables_[prefix + k] = t;
}

bool CheckReport::passed() const {
  if (verdicts_.empty()) return false;
  for (const auto& v : verdicts_) {
    if (!v.pass) return false;
  }
  return true;
}

double CheckReport::value(const std::string& key) const {
  for (const auto* list : {&measured_, &constants_, &orders_}) {
    for (const auto& [k, v] : *list) {
      if (k == key) return v;
    }
  }
  throw std::out_of_range("no value named " + key);
}

std::string CheckReport::to_text() const {
  std::string out = fmt::format("check: {}\nstatus: {}\n", name_, passed() ? "pass" : "fail");
  for (const auto& [k, v] : parameters_) out += fmt::format("parameter {}: {}\n", k, v);
  for (const auto& [k, v] : measured_) out += fmt::format("measured {}: {}\n", k, number(v));
  for (const auto& [k, v] : constants_) out += fmt::format("constant {}: {}\n", k, number(v));
  for (const auto& [k, v] : orders_) out += fmt::format("order {}: {}\n", k, number(v));
  for (const auto& v : verdicts_) {
    out += fmt::format("verdict {}: {} {} {} {}\n", v.criterion, number(v.value), v.relation, number(v.bound),
                       v.pass ? "pass" : "fail");
  }
  for (const auto& n : notes_) out += fmt::format("note: {}\n", n);
  for (const auto& [name, t] : tables_) {
    out += fmt::format("table {}\n", name);
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
    out += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + number(row[c]);
      out += "\n";
    }
    out += "end table\n";
  }
  return out;
}

CheckReport CheckReport::from_text(const std::string& text) {
  CheckReport r;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto split = [&](const std::string& body) {
    const auto colon = body.find(": ");
    if (colon == std::string::npos) throw ParseError(fmt::format("line {}: expected 'key: value'", lineno));
    return std::pair<std::string, std::string>(body.substr(0, colon), body.substr(colon + 2));
  };
  auto starts = [&](const std::string& prefix) { return line.rfind(prefix, 0) == 0; };
  bool have_name = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (starts("check: ")) {
      r.name_ = line.substr(7);
      have_name = true;
    } else if (starts("status: ")) {
      // derived from the verdicts
    } else if (starts("parameter ")) {
      const auto [k, v] = split(line.substr(10));
      r.parameters_.emplace_back(k, v);
      if (k == "tolerance_scale") r.tolerance_scale_ = parse_number(v, lineno);
    } else if (starts("measured ")) {
      const auto [k, v] = split(line.substr(9));
      r.measured_.emplace_back(k, parse_number(v, lineno));
    } else if (starts("constant ")) {
      const auto [k, v] = split(line.substr(9));
      r.constants_.emplace_back(k, parse_number(v, lineno));
    } else if (starts("order ")) {
      const auto [k, v] = split(line.substr(6));
      r.orders_.emplace_back(k, parse_number(v, lineno));
    } else if (starts("verdict ")) {
      const auto [k, v] = split(line.substr(8));
      std::istringstream vs(v);
      std::string value, relation, bound, status;
      if (!(vs >> value >> relation >> bound >> status) || (status != "pass" && status != "fail")) {
        throw ParseError(fmt::format("line {}: malformed verdict", lineno));
      }
      r.verdicts_.push_back({k, parse_number(value, lineno), relation, parse_number(bound, lineno), status == "pass"});
    } else if (starts("note: ")) {
      r.notes_.push_back(line.substr(6));
    } else if (starts("table ")) {
      Table& t = r.tables_[line.substr(6)];
      if (!std::getline(is, line)) throw ParseError(fmt::format("line {}: table without header", lineno));
      ++lineno;
      std::istringstream hs(line);
      std::string cell;
      while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
      bool closed = false;
      while (std::getline(is, line)) {
        ++lineno;
        if (line == "end table") {
          closed = true;
          break;
        }
        std::vector<double> row;
        std::istringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(parse_number(cell, lineno));
        if (row.size() != t.columns.size()) throw ParseError(fmt::format("line {}: row width differs", lineno));
        t.rows.push_back(std::move(row));
      }
      if (!closed) throw ParseError("unterminated table");
    } else {
      throw ParseError(fmt::format("line {}: unrecognised entry '{}'", lineno, line));
    }
  }
  if (!have_name) throw ParseError("report has no 'check:' line");
  return r;
}

}  // namespace pmllab
