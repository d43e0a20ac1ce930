#pragma once

// JSON form of CompositeProblem. Dense matrices are row-major flat arrays.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sacfgm/problem.hpp"

namespace sacfgm {

namespace io {

using nlohmann::json;

inline json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json mat_to_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

inline Eigen::VectorXd json_to_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Eigen::MatrixXd json_to_mat(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  const Eigen::VectorXd flat = json_to_vec(j, path);
  if (flat.size() != rows * cols)
    throw ConfigError(path + ": expected " + std::to_string(rows * cols) + " entries, got " +
                      std::to_string(flat.size()));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  return m;
}

inline json set_to_json(const FeasibleSet& s) {
  return std::visit(overloaded{[](const FullSpace&) { return json{{"kind", "full"}}; },
                               [](const Box& b) {
                                 return json{{"kind", "box"}, {"lower", vec_to_json(b.lower)},
                                             {"upper", vec_to_json(b.upper)}};
                               },
                               [](const Ball& b) {
                                 return json{{"kind", "ball"}, {"center", vec_to_json(b.center)},
                                             {"radius", b.radius}};
                               }},
                    s);
}

inline FeasibleSet json_to_set(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError(path + ".kind: missing");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "full") return FullSpace{};
  if (kind == "box") return Box{json_to_vec(j.at("lower"), path + ".lower"), json_to_vec(j.at("upper"), path + ".upper")};
  if (kind == "ball") {
    if (!j.contains("radius") || !j.at("radius").is_number()) throw ConfigError(path + ".radius: expected a number");
    return Ball{json_to_vec(j.at("center"), path + ".center"), j.at("radius").get<double>()};
  }
  throw ConfigError(path + ".kind: unknown set kind '" + kind + "' (expected full, box or ball)");
}

inline json prox_to_json(const ProxTerm& h) {
  return std::visit(overloaded{[](const ZeroTerm&) { return json{{"kind", "zero"}}; },
                               [](const L1Term& l) { return json{{"kind", "l1"}, {"weight", l.weight}}; },
                               [](const SetIndicatorTerm& s) { return json{{"kind", "set"}, {"set", set_to_json(s.set)}}; }},
                    h);
}

inline ProxTerm json_to_prox(const json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError(path + ".kind: missing");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return ZeroTerm{};
  if (kind == "l1") {
    if (!j.contains("weight") || !j.at("weight").is_number()) throw ConfigError(path + ".weight: expected a number");
    return L1Term{j.at("weight").get<double>()};
  }
  if (kind == "set") return SetIndicatorTerm{json_to_set(j.at("set"), path + ".set")};
  throw ConfigError(path + ".kind: unknown prox term '" + kind + "' (expected zero, l1 or set)");
}

}  // namespace io

inline nlohmann::json problem_to_json(const CompositeProblem& p) {
  using io::json;
  json j;
  j["name"] = p.name;
  j["kind"] = p.f.kind();
  j["dim"] = p.dim();
  j["weight"] = p.f.weight();
  const Eigen::Index m = p.f.size();
  j["M"] = m;
  std::visit(overloaded{[&](const LeastSquaresTerms& t) {
                          j["components"] = {{"rows", io::mat_to_json(t.rows)}, {"targets", io::vec_to_json(t.targets)}};
                        },
                        [&](const QuadraticTerms& t) {
                          j["components"] = {{"hessian", io::mat_to_json(t.hessian)},
                                             {"centers", io::mat_to_json(t.centers)},
                                             {"scales", io::vec_to_json(t.scales)}};
                        },
                        [&](const LogisticTerms& t) {
                          j["components"] = {{"features", io::mat_to_json(t.features)},
                                             {"labels", io::vec_to_json(t.labels)}};
                        }},
             p.f.terms());
  j["h"] = io::prox_to_json(p.h);
  j["set"] = io::set_to_json(p.set);
  j["x0"] = io::vec_to_json(p.x0);
  if (p.optimum)
    j["optimum"] = {{"x", io::vec_to_json(p.optimum->x)}, {"psi_star", p.optimum->psi_star}};
  else
    j["optimum"] = nullptr;
  return j;
}

inline CompositeProblem problem_from_json(const nlohmann::json& j, const std::string& path = "problem") {
  using io::json;
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const char* key : {"kind", "dim", "components", "x0"})
    if (!j.contains(key)) throw ConfigError(path + "." + key + ": missing");
  const std::string kind = j.at("kind").get<std::string>();
  const auto dim = j.at("dim").get<Eigen::Index>();
  if (dim <= 0) throw ConfigError(path + ".dim: must be positive");
  const double weight = j.value("weight", 1.0);
  const json& c = j.at("components");
  const std::string cp = path + ".components";
  ComponentTerms terms;
  if (kind == "least_squares") {
    Eigen::VectorXd targets = io::json_to_vec(c.at("targets"), cp + ".targets");
    terms = LeastSquaresTerms{io::json_to_mat(c.at("rows"), targets.size(), dim, cp + ".rows"), targets};
  } else if (kind == "quadratic") {
    Eigen::VectorXd scales = io::json_to_vec(c.at("scales"), cp + ".scales");
    terms = QuadraticTerms{io::json_to_mat(c.at("hessian"), dim, dim, cp + ".hessian"),
                           io::json_to_mat(c.at("centers"), scales.size(), dim, cp + ".centers"), scales};
  } else if (kind == "logistic") {
    Eigen::VectorXd labels = io::json_to_vec(c.at("labels"), cp + ".labels");
    terms = LogisticTerms{io::json_to_mat(c.at("features"), labels.size(), dim, cp + ".features"), labels};
  } else {
    throw ConfigError(path + ".kind: unknown problem kind '" + kind + "' (expected least_squares, quadratic or logistic)");
  }
  CompositeProblem p;
  try {
    p.f = SmoothFiniteSum(std::move(terms), weight);
  } catch (const ContractViolation& e) {
    throw ConfigError(cp + ": " + e.what());
  }
  p.name = j.value("name", std::string());
  p.h = j.contains("h") ? io::json_to_prox(j.at("h"), path + ".h") : ProxTerm{ZeroTerm{}};
  p.set = j.contains("set") ? io::json_to_set(j.at("set"), path + ".set") : FeasibleSet{FullSpace{}};
  p.x0 = io::json_to_vec(j.at("x0"), path + ".x0");
  if (j.contains("optimum") && !j.at("optimum").is_null()) {
    const json& o = j.at("optimum");
    p.optimum = KnownOptimum{io::json_to_vec(o.at("x"), path + ".optimum.x"), o.at("psi_star").get<double>()};
  }
  try {
    p.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

inline void save_problem(const CompositeProblem& p, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write problem file '" + file + "'");
  out << problem_to_json(p).dump(1) << '\n';
}

inline CompositeProblem load_problem(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read problem file '" + file + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file + ": " + e.what());
  }
  return problem_from_json(j);
}

}  // namespace sacfgm
