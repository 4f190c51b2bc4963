#include "dualqp/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dualqp {

namespace {

using nlohmann::json;

Vector read_vector(const json& j, const char* key, double null_value) {
  if (!j.is_array()) throw std::invalid_argument(std::string("problem JSON: '") + key + "' must be an array");
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (e.is_null()) v.push_back(null_value);
    else if (e.is_number()) v.push_back(e.get<double>());
    else throw std::invalid_argument(std::string("problem JSON: '") + key + "' has a non-numeric entry");
  }
  return v;
}

DenseMatrix read_matrix(const json& j, const char* key, std::size_t cols_if_empty) {
  if (!j.is_array()) throw std::invalid_argument(std::string("problem JSON: '") + key + "' must be an array of rows");
  if (j.empty()) return DenseMatrix(0, cols_if_empty);
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    Vector row = read_vector(r, key, kInf);
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument(std::string("problem JSON: '") + key + "' has a null entry");
    rows.push_back(std::move(row));
  }
  return DenseMatrix::from_rows(rows);
}

json write_vector(const Vector& v) {
  json a = json::array();
  for (double x : v) {
    if (std::isfinite(x)) a.push_back(x);
    else a.push_back(nullptr);
  }
  return a;
}

json write_matrix(const DenseMatrix& m) {
  json a = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (double x : m.row(i)) row.push_back(x);
    a.push_back(std::move(row));
  }
  return a;
}

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("problem JSON: missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

QpProblem problem_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("problem JSON: top level must be an object");
  QpProblem p;
  p.q = read_vector(require(j, "q"), "q", kInf);
  const std::size_t n = p.q.size();
  p.Q = read_matrix(require(j, "Q"), "Q", n);
  p.box.lb = read_vector(require(j, "lb"), "lb", -kInf);
  p.box.ub = read_vector(require(j, "ub"), "ub", kInf);
  if (j.contains("Gbar")) p.Gbar = read_matrix(j.at("Gbar"), "Gbar", n);
  else p.Gbar = DenseMatrix(0, n);
  if (j.contains("gbar")) p.gbar = read_vector(j.at("gbar"), "gbar", kInf);
  const std::size_t m = p.gbar.size();
  p.clb = j.contains("clb") ? read_vector(j.at("clb"), "clb", -kInf) : Vector(m, -kInf);
  p.cub = j.contains("cub") ? read_vector(j.at("cub"), "cub", kInf) : Vector(m, kInf);
  validate(p);
  return p;
}

json problem_to_json(const QpProblem& p) {
  json j;
  j["Q"] = write_matrix(p.Q);
  j["q"] = write_vector(p.q);
  j["lb"] = write_vector(p.box.lb);
  j["ub"] = write_vector(p.box.ub);
  j["Gbar"] = write_matrix(p.Gbar);
  j["gbar"] = write_vector(p.gbar);
  j["clb"] = write_vector(p.clb);
  j["cub"] = write_vector(p.cub);
  return j;
}

QpProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open problem file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed problem JSON in '" + path + "': " + e.what());
  }
  return problem_from_json(j);
}

void save_problem(const QpProblem& p, const std::string& path) {
  write_text(path, problem_to_json(p).dump(1) + "\n");
}

json to_json(const SolveResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["f"] = r.f;
  j["infeas"] = r.infeas;
  j["outer_iterations"] = r.outer_iterations;
  j["total_inner_iterations"] = r.total_inner_iterations;
  j["u"] = write_vector(r.u_out);
  j["x"] = write_vector(r.x_out);
  return j;
}

json to_json(const Certificate& c) {
  json j;
  j["variant"] = to_string(c.variant);
  j["recovery"] = to_string(c.recovery);
  j["eps"] = c.eps;
  j["delta"] = c.delta;
  j["alpha"] = c.alpha;
  j["outer_bound"] = c.outer_bound;
  if (c.total_projection_bound) j["total_projection_bound"] = *c.total_projection_bound;
  else j["total_projection_bound"] = "unavailable";
  j["R_d_used"] = c.R_d_used;
  if (std::isfinite(c.R_p_used)) j["R_p_used"] = c.R_p_used;
  else j["R_p_used"] = nullptr;
  j["warnings"] = c.warnings;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace dualqp
