// Copyright 2026 The kmsgibbs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kmsgibbs/analysis.hpp"
#include "kmsgibbs/balance.hpp"
#include "kmsgibbs/cpmap.hpp"
#include "kmsgibbs/dynamics.hpp"
#include "kmsgibbs/hamiltonian.hpp"

namespace kmsgibbs::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/** {"re": [[...]], "im": [[...]]}, row-major. */
inline json matrix_to_json(const CMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    json c = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

namespace detail {

inline RMatrix real_rows(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) fail(ErrorCode::kParse, std::string(what) + " must be a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(rows.at(0).size());
  RMatrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m)
      fail(ErrorCode::kParse, std::string(what) + " rows must have equal length");
    for (Eigen::Index j = 0; j < m; ++j) {
      const json& v = row.at(static_cast<std::size_t>(j));
      if (!v.is_number()) fail(ErrorCode::kParse, std::string(what) + " entries must be numbers");
      out(i, j) = v.get<double>();
    }
  }
  return out;
}

}  // namespace detail

/** Accepts {"re", "im"} (im optional) or a plain nested array of reals. */
inline CMatrix matrix_from_json(const json& j) {
  if (j.is_array()) return detail::real_rows(j, "matrix").cast<cplx>();
  if (!j.is_object() || !j.contains("re")) fail(ErrorCode::kParse, "matrix must be {\"re\":..,\"im\":..} or an array");
  const RMatrix re = detail::real_rows(j.at("re"), "re");
  RMatrix im = RMatrix::Zero(re.rows(), re.cols());
  if (j.contains("im")) im = detail::real_rows(j.at("im"), "im");
  if (im.rows() != re.rows() || im.cols() != re.cols()) fail(ErrorCode::kParse, "re and im shapes differ");
  CMatrix m(re.rows(), re.cols());
  for (Eigen::Index r = 0; r < re.rows(); ++r)
    for (Eigen::Index c = 0; c < re.cols(); ++c) m(r, c) = cplx(re(r, c), im(r, c));
  return m;
}

inline json kraus_to_json(const std::vector<CMatrix>& ks) {
  json a = json::array();
  for (const auto& k : ks) a.push_back(matrix_to_json(k));
  return a;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kParse, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, what + ": " + e.what());
  }
}

/** Inline JSON, a path to a JSON file, or a shorthand such as "ising-L3". */
inline json load_json_argument(const std::string& arg, const std::string& what) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return parse_json_text(arg, what);
  if (std::filesystem::exists(arg)) return parse_json_text(read_file(arg), what);
  return json(arg);
}

inline ModelSpec model_from_json(const json& j) {
  ModelSpec s;
  if (j.is_string()) {
    static const std::regex shorthand(R"((ising|heisenberg)-L(\d+))");
    std::smatch m;
    const std::string str = j.get<std::string>();
    if (!std::regex_match(str, m, shorthand)) fail(ErrorCode::kParse, "unknown model shorthand '" + str + "'");
    s.model = m[1];
    s.L = std::stoi(m[2]);
    return s;
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "model descriptor must be a JSON object");
  static const std::vector<std::string> known{"model", "L", "beta", "J", "hx", "hz", "periodic", "entries"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      fail(ErrorCode::kParse, "unknown model field '" + k + "'");
  try {
    s.model = j.value("model", std::string("ising"));
    s.L = j.value("L", 1);
    s.beta = j.value("beta", 1.0);
    s.J = j.value("J", 1.0);
    s.hx = j.value("hx", 0.0);
    s.hz = j.value("hz", 0.0);
    s.periodic = j.value("periodic", false);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("model descriptor: ") + e.what());
  }
  if (s.model == "diagonal") {
    if (!j.contains("entries") || !j.at("entries").is_array()) fail(ErrorCode::kParse, "diagonal model needs \"entries\"");
    RVector v(static_cast<Eigen::Index>(j.at("entries").size()));
    for (std::size_t k = 0; k < j.at("entries").size(); ++k) {
      if (!j.at("entries")[k].is_number()) fail(ErrorCode::kParse, "diagonal entries must be numbers");
      v(static_cast<Eigen::Index>(k)) = j.at("entries")[k].get<double>();
    }
    s.diagonal = v;
    s.L = 0;
  } else if (s.model == "matrix") {
    if (!j.contains("entries")) fail(ErrorCode::kParse, "matrix model needs \"entries\"");
    s.matrix = matrix_from_json(j.at("entries"));
    s.L = 0;
  } else if (s.model != "ising" && s.model != "heisenberg") {
    fail(ErrorCode::kParse, "unknown model '" + s.model + "'");
  }
  return s;
}

inline json model_to_json(const ModelSpec& s) {
  json j;
  j["model"] = s.model;
  if (s.model == "ising" || s.model == "heisenberg") {
    j["L"] = s.L;
    j["J"] = s.J;
    j["hx"] = s.hx;
    j["hz"] = s.hz;
    j["periodic"] = s.periodic;
  }
  j["beta"] = s.beta;
  if (s.diagonal) {
    json e = json::array();
    for (Eigen::Index k = 0; k < s.diagonal->size(); ++k) e.push_back((*s.diagonal)(k));
    j["entries"] = e;
  }
  if (s.matrix) j["entries"] = matrix_to_json(*s.matrix);
  return j;
}

/** Built-in profile name or a JSON table {"class": "davies"|"amplitude", "points": [[nu, value], ...]}. */
inline WeightProfile profile_from_argument(const std::string& arg) {
  const json j = load_json_argument(arg, "profile");
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "custom") fail(ErrorCode::kInvalidProfile, "custom profiles are given as a JSON table");
    return profiles::by_name(name);
  }
  if (!j.is_object() || !j.contains("class") || !j.contains("points"))
    fail(ErrorCode::kInvalidProfile, "custom profile needs \"class\" and \"points\"");
  const std::string cls = j.at("class").get<std::string>();
  if (cls != "davies" && cls != "amplitude") fail(ErrorCode::kInvalidProfile, "profile class must be davies or amplitude");
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      fail(ErrorCode::kInvalidProfile, "profile points must be [nu, value] pairs");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return profiles::custom(cls == "davies" ? ProfileClass::kDavies : ProfileClass::kAmplitude, std::move(pts));
}

inline json notes_to_json(const std::vector<std::string>& notes) {
  json a = json::array();
  for (const auto& n : notes) a.push_back(n);
  return a;
}

inline json report_to_json(const VerificationReport& r) {
  json j;
  j["db_residual"] = r.db_residual;
  j["trace_residual"] = r.trace_residual;
  j["cp_min_eig"] = r.cp_min_eig;
  j["fixed_point_residual"] = r.fixed_point_residual;
  j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
  j["notes"] = notes_to_json(r.notes);
  return j;
}

inline json channel_to_json(const Channel& c) {
  json j;
  j["provenance"] = c.provenance;
  j["transition_kraus"] = kraus_to_json(c.transition);
  j["reject_kraus"] = kraus_to_json(c.reject);
  json diag = json::object();
  for (const auto& [k, v] : c.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  j["notes"] = notes_to_json(c.notes);
  return j;
}

inline json lindbladian_to_json(const Lindbladian& l) {
  json j;
  j["transition_kraus"] = kraus_to_json(l.transition.kraus());
  j["decay"] = matrix_to_json(l.decay);
  j["coherent"] = matrix_to_json(l.coherent);
  j["notes"] = notes_to_json(l.notes);
  return j;
}

/** Fixed-format number for CSV output. */
inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "model,L,beta,construction,gap_continuous,gap_discrete,mixing_time_est,db_residual\n";
  for (const auto& row : r.rows) {
    os << row.model << ',' << row.L << ',' << fmt(row.beta) << ',' << row.construction << ','
       << fmt(row.gap_continuous) << ',' << fmt(row.gap_discrete) << ','
       << (row.mixing_time_est ? fmt(*row.mixing_time_est) : std::string("inf")) << ',' << fmt(row.db_residual)
       << '\n';
  }
  return os.str();
}

inline json sweep_json(const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j;
    j["model"] = row.model;
    j["L"] = row.L;
    j["beta"] = row.beta;
    j["construction"] = row.construction;
    j["gap_continuous"] = row.gap_continuous;
    j["gap_discrete"] = row.gap_discrete;
    j["mixing_time_est"] = row.mixing_time_est ? json(*row.mixing_time_est) : json(nullptr);
    j["db_residual"] = row.db_residual;
    j["s"] = row.s;
    j["discrete_bound_holds"] = row.discrete_bound_holds;
    j["notes"] = notes_to_json(row.notes);
    rows.push_back(std::move(j));
  }
  json j;
  j["rows"] = std::move(rows);
  j["fitted_slope"] = r.fitted_slope;
  j["beta_threshold"] = r.beta_threshold ? json(*r.beta_threshold) : json(nullptr);
  j["max_step_delta"] = r.max_step_delta;
  return j;
}

inline std::string curve_csv(const DistanceCurve& c) {
  std::ostringstream os;
  const bool lazy = !c.lazy_distance.empty();
  os << "t,distance" << (lazy ? ",lazy_distance" : "") << '\n';
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    os << fmt(c.t[k]) << ',' << fmt(c.distance[k]);
    if (lazy) os << ',' << fmt(c.lazy_distance[k]);
    os << '\n';
  }
  return os.str();
}

/** Single-line error record for stderr. */
inline std::string error_record(const std::string& code, const std::string& message) {
  json j;
  j["error"] = code;
  j["message"] = message;
  j["schema_version"] = kSchemaVersion;
  return j.dump();
}

}  // namespace kmsgibbs::io
