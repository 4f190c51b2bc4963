#include "dualqp/certify.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dualqp {

namespace {

void check_inputs(double eps, const ProblemConstants& consts, double R_d) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("certificate: eps must be > 0");
  if (!(R_d > 0.0) || !std::isfinite(R_d)) throw std::invalid_argument("certificate: R_d must be > 0");
  if (!(consts.L_d > 0.0)) throw std::invalid_argument("certificate: L_d must be > 0");
}

void require_compact(const ProblemConstants& consts, const char* what) {
  if (!std::isfinite(consts.R_p) || !std::isfinite(consts.Lbar_f)) {
    throw CertificateUnavailable(std::string(what) +
                                 ": unavailable (Assumption 2 required: compact box)");
  }
}

}  // namespace

std::int64_t saturating_floor(double value) {
  if (std::isnan(value)) throw std::domain_error("iteration bound is NaN");
  if (!(value >= 1.0)) return 1;
  if (value >= 9.2e18) return INT64_MAX;
  return static_cast<std::int64_t>(std::floor(value));
}

double alpha(const ProblemConstants& consts, double R_d, int p) {
  if (!std::isfinite(consts.Lbar_f)) {
    throw CertificateUnavailable("alpha: unavailable (Lbar_f infinite, compact box required)");
  }
  if (consts.c_g <= 0.0) return 1.0;
  return std::max(1.0, std::pow(consts.Lbar_f / (consts.c_g * R_d), 2.0 / p));
}

double delta_rule(Variant v, Recovery r, double eps, const ProblemConstants& consts, double R_d) {
  check_inputs(eps, consts, R_d);
  const double L_d = consts.L_d;
  if (r == Recovery::Average) {
    if (v == Variant::IDGM) return eps / 3.0;
    return std::pow(eps, 1.5) / (8.0 * std::sqrt(L_d) * R_d);
  }
  require_compact(consts, "last-iterate delta");
  const int p = p_theta(v);
  const double a = alpha(consts, R_d, p);
  const double D = L_d * R_d * R_d;
  return D / (2.0 * std::pow(a, p - 1)) * std::pow(eps / (6.0 * D), 4.0 - 2.0 / p);
}

std::int64_t outer_bound(Variant v, Recovery r, double eps, const ProblemConstants& consts,
                         double R_d) {
  check_inputs(eps, consts, R_d);
  const double D = consts.L_d * R_d * R_d;
  if (r == Recovery::Average) {
    if (v == Variant::IDGM) return saturating_floor(8.0 * D / eps);
    return saturating_floor(std::sqrt(32.0 * D / eps));
  }
  require_compact(consts, "last-iterate outer bound");
  const int p = p_theta(v);
  return saturating_floor(alpha(consts, R_d, p) * std::pow(6.0 * D / eps, 2.0 / p));
}

std::int64_t total_projection_bound(Variant v, Recovery r, double eps,
                                    const ProblemConstants& consts, double R_d, double R_p) {
  check_inputs(eps, consts, R_d);
  if (!std::isfinite(R_p)) {
    throw CertificateUnavailable("total projection bound: unavailable (R_p infinite)");
  }
  const double L_d = consts.L_d;
  const double D = L_d * R_d * R_d;
  const double cond = std::sqrt(consts.L_f / consts.sigma_f);
  const double LfRp2 = consts.L_f * R_p * R_p;
  if (r == Recovery::Average) {
    if (v == Variant::IDGM) return saturating_floor(8.0 * cond * (D / eps) * std::log(LfRp2 / eps));
    return saturating_floor(cond * std::sqrt(32.0 * D / eps) *
                            std::log(4.0 * std::sqrt(L_d) * LfRp2 * R_d / std::pow(eps, 1.5)));
  }
  require_compact(consts, "last-iterate total projection bound");
  const int p = p_theta(v);
  const double a = alpha(consts, R_d, p);
  const double ratio = 6.0 * D / eps;
  const double logs =
      (4.0 - 2.0 / p) * std::log(ratio) + std::log(LfRp2 * std::pow(a, p - 1) / D);
  return saturating_floor(cond * std::pow(ratio, 2.0 / p) * logs);
}

Certificate certificate(const ProblemConstants& consts, Variant v, Recovery r, double eps,
                        std::optional<double> R_d) {
  Certificate c;
  c.variant = v;
  c.recovery = r;
  c.eps = eps;
  c.R_d_used = R_d.value_or(consts.R_d_default);
  c.R_p_used = consts.R_p;
  if (c.R_d_used < consts.R_d_default) {
    std::ostringstream os;
    os << "R_d = " << c.R_d_used << " is below the default " << consts.R_d_default
       << "; bounds assume R_d is at least the distance to the dual optimal set";
    c.warnings.push_back(os.str());
  }
  c.delta = delta_rule(v, r, eps, consts, c.R_d_used);
  if (r == Recovery::LastIterate) c.alpha = alpha(consts, c.R_d_used, p_theta(v));
  c.outer_bound = outer_bound(v, r, eps, consts, c.R_d_used);
  if (std::isfinite(consts.R_p)) {
    c.total_projection_bound = total_projection_bound(v, r, eps, consts, c.R_d_used, consts.R_p);
  } else {
    c.warnings.push_back("total projection bound unavailable: box is not compact");
  }
  return c;
}

}  // namespace dualqp
