#pragma once

// A-priori complexity certificates: the inner accuracy delta to use for a
// target eps, the outer iteration count that then suffices, and the total
// number of box projections (outer count times the inner count per solve).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dualqp/outer.hpp"
#include "dualqp/problem.hpp"

namespace dualqp {

/// Thrown when a bound needs a compact box (finite R_p and Lbar_f).
class CertificateUnavailable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Certificate {
  Variant variant = Variant::IDFGM;
  Recovery recovery = Recovery::LastIterate;
  double eps = 0.0;
  double delta = 0.0;
  double alpha = 1.0;
  std::int64_t outer_bound = 1;
  std::optional<std::int64_t> total_projection_bound;  // empty: unavailable
  double R_d_used = 1.0;
  double R_p_used = kInf;
  std::vector<std::string> warnings;
};

/// max{1, (Lbar_f / (c_g R_d))^(2/p)}
double alpha(const ProblemConstants& consts, double R_d, int p);

double delta_rule(Variant v, Recovery r, double eps, const ProblemConstants& consts, double R_d);

std::int64_t outer_bound(Variant v, Recovery r, double eps, const ProblemConstants& consts,
                         double R_d);

std::int64_t total_projection_bound(Variant v, Recovery r, double eps,
                                    const ProblemConstants& consts, double R_d, double R_p);

Certificate certificate(const ProblemConstants& consts, Variant v, Recovery r, double eps,
                        std::optional<double> R_d = std::nullopt);

/// Floors a nonnegative real into [1, INT64_MAX].
std::int64_t saturating_floor(double value);

}  // namespace dualqp
