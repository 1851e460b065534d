#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"

namespace bmlab {

using json = nlohmann::ordered_json;

// Non-finite doubles are stored as strings so reports survive a JSON round trip.
inline json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}
inline double num(const json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return inf;
    if (s == "-inf") return -inf;
    fail(ErrorCode::BadConfig, "expected a number, got '" + s + "'");
  }
  if (!j.is_number()) fail(ErrorCode::BadConfig, "expected a number");
  return j.get<double>();
}

enum class Verdict { Holds, Violated, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}
inline Verdict verdict_from(const std::string& s) {
  if (s == "holds") return Verdict::Holds;
  if (s == "violated") return Verdict::Violated;
  if (s == "inconclusive") return Verdict::Inconclusive;
  fail(ErrorCode::BadConfig, "unknown verdict '" + s + "'");
}

struct CheckReport {
  std::string name;
  double margin = 0.0;
  double tolerance = 0.0;
  json witness = json::object();
  Verdict verdict = Verdict::Inconclusive;
  bool theorem = true;  // false for exploratory checks
  std::map<std::string, double> details;

  bool holds() const { return verdict == Verdict::Holds; }
};

inline json to_json(const CheckReport& r) {
  json d = json::object();
  for (const auto& [k, v] : r.details) d[k] = num(v);
  return json{{"name", r.name},         {"margin", num(r.margin)},  {"tolerance", num(r.tolerance)},
              {"verdict", to_string(r.verdict)}, {"theorem", r.theorem}, {"details", d},
              {"witness", r.witness}};
}

inline CheckReport check_report_from_json(const json& j) {
  CheckReport r;
  r.name = j.at("name").get<std::string>();
  r.margin = num(j.at("margin"));
  r.tolerance = num(j.at("tolerance"));
  r.verdict = verdict_from(j.at("verdict").get<std::string>());
  r.theorem = j.at("theorem").get<bool>();
  for (const auto& [k, v] : j.at("details").items()) r.details[k] = num(v);
  r.witness = j.at("witness");
  return r;
}

inline bool operator==(const CheckReport& a, const CheckReport& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  if (a.details.size() != b.details.size()) return false;
  for (const auto& [k, v] : a.details) {
    auto it = b.details.find(k);
    if (it == b.details.end() || !same(v, it->second)) return false;
  }
  return a.name == b.name && same(a.margin, b.margin) && same(a.tolerance, b.tolerance) &&
         a.verdict == b.verdict && a.theorem == b.theorem && a.witness == b.witness;
}

// Holds if margin >= -tol; a negative margin stays inconclusive unless an
// independent estimate confirms it.
inline Verdict judge(double margin, double tol, bool confirmed_negative) {
  if (margin >= -tol) return Verdict::Holds;
  return confirmed_negative ? Verdict::Violated : Verdict::Inconclusive;
}

}  // namespace bmlab
