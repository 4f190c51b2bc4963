#pragma once

// Problem JSON: {"Q": [[..]], "q": [..], "lb": [..], "ub": [..], "Gbar": [[..]],
// "gbar": [..], "clb": [..], "cub": [..]}. null entries in lb/clb mean -inf,
// in ub/cub +inf. Missing constraint keys mean no constraint rows.

#include <string>

#include "dualqp/certify.hpp"
#include "dualqp/outer.hpp"
#include "dualqp/problem.hpp"
#include "json.hpp"

namespace dualqp {

QpProblem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const QpProblem& p);

QpProblem load_problem(const std::string& path);
void save_problem(const QpProblem& p, const std::string& path);

nlohmann::json to_json(const SolveResult& r);
nlohmann::json to_json(const Certificate& c);

void write_text(const std::string& path, const std::string& text);

}  // namespace dualqp
