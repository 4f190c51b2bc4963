#include "dualqp/linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace dualqp {

namespace {

struct ProfileState {
  bool enabled = false;
  MatVecProfile profile;
};

thread_local ProfileState tl_profile;

class ProfileTimer {
 public:
  explicit ProfileTimer(std::uint64_t flops) : flops_(flops) {
    if (tl_profile.enabled) start_ = std::chrono::steady_clock::now();
  }
  ~ProfileTimer() {
    if (!tl_profile.enabled) return;
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    tl_profile.profile.calls += 1;
    tl_profile.profile.flops += flops_;
    tl_profile.profile.nanoseconds += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count());
  }

 private:
  std::uint64_t flops_;
  std::chrono::steady_clock::time_point start_{};
};

std::string dims(const char* what, std::size_t a, std::size_t b) {
  std::ostringstream os;
  os << what << ": " << a << " vs " << b;
  return os.str();
}

// Householder reduction of a symmetric matrix to tridiagonal form.
// On return diag has n entries and off has n-1 entries.
void tridiagonalize(DenseMatrix a, Vector& diag, Vector& off) {
  const std::size_t n = a.rows();
  diag.assign(n, 0.0);
  off.assign(n > 0 ? n - 1 : 0, 0.0);
  Vector v(n), p(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;
    double sigma = 0.0;
    for (std::size_t i = 0; i < m; ++i) sigma += a(k + 1 + i, k) * a(k + 1 + i, k);
    const double xnorm = std::sqrt(sigma);
    diag[k] = a(k, k);
    if (xnorm == 0.0) {
      off[k] = 0.0;
      continue;
    }
    const double x0 = a(k + 1, k);
    const double alpha = x0 >= 0.0 ? -xnorm : xnorm;
    for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
    v[0] -= alpha;
    double vnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm += v[i] * v[i];
    vnorm = std::sqrt(vnorm);
    if (vnorm == 0.0) {
      off[k] = x0;
      continue;
    }
    for (std::size_t i = 0; i < m; ++i) v[i] /= vnorm;
    off[k] = alpha;
    // S <- S - 2 (v w^T + w v^T), w = S v - (v^T S v) v
    double kappa = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      const auto r = a.row(k + 1 + i);
      for (std::size_t j = 0; j < m; ++j) s += r[k + 1 + j] * v[j];
      p[i] = s;
      kappa += v[i] * s;
    }
    for (std::size_t i = 0; i < m; ++i) p[i] -= kappa * v[i];
    for (std::size_t i = 0; i < m; ++i) {
      auto r = a.row(k + 1 + i);
      const double vi = 2.0 * v[i];
      const double pi = 2.0 * p[i];
      for (std::size_t j = 0; j < m; ++j) r[k + 1 + j] -= vi * p[j] + pi * v[j];
    }
  }
  if (n >= 2) {
    diag[n - 2] = a(n - 2, n - 2);
    off[n - 2] = a(n - 1, n - 2);
  }
  if (n >= 1) diag[n - 1] = a(n - 1, n - 1);
}

// Number of eigenvalues of the tridiagonal matrix strictly below x.
std::size_t sturm_count(const Vector& diag, const Vector& off_sq, double x, double pivmin) {
  std::size_t count = 0;
  double q = diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < diag.size(); ++i) {
    q = diag[i] - x - off_sq[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

double kth_eigenvalue(const Vector& diag, const Vector& off, std::size_t k) {
  const std::size_t n = diag.size();
  Vector off_sq(off.size());
  double max_off_sq = 0.0;
  for (std::size_t i = 0; i < off.size(); ++i) {
    off_sq[i] = off[i] * off[i];
    max_off_sq = std::max(max_off_sq, off_sq[i]);
  }
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_off_sq);
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(off[i - 1]);
    if (i + 1 < n) radius += std::abs(off[i]);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  const double spread = std::max(std::abs(lo), std::abs(hi));
  lo -= 2.0 * std::numeric_limits<double>::epsilon() * spread + pivmin;
  hi += 2.0 * std::numeric_limits<double>::epsilon() * spread + pivmin;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(lo), std::abs(hi)) +
                       pivmin;
    if (hi - lo <= tol) break;
    if (sturm_count(diag, off_sq, mid, pivmin) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError(dims("matrix data length vs rows*cols", data_.size(), rows_ * cols_));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
  DenseMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  const std::size_t cols = rows.front().size();
  DenseMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw DimensionError(dims("ragged matrix row length", rows[i].size(), cols));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool DenseMatrix::all_finite() const { return dualqp::all_finite(data_); }

bool Box::bounded() const {
  for (std::size_t i = 0; i < lb.size(); ++i)
    if (!std::isfinite(lb[i]) || !std::isfinite(ub[i])) return false;
  return true;
}

bool Box::contains(std::span<const double> v) const {
  if (v.size() != lb.size()) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < lb[i] || v[i] > ub[i]) return false;
  return true;
}

Vector Box::center() const {
  Vector c(lb.size());
  for (std::size_t i = 0; i < lb.size(); ++i) {
    const bool lo = std::isfinite(lb[i]);
    const bool hi = std::isfinite(ub[i]);
    if (lo && hi) {
      c[i] = 0.5 * (lb[i] + ub[i]);
    } else if (lo) {
      c[i] = std::max(lb[i], 0.0);
    } else if (hi) {
      c[i] = std::min(ub[i], 0.0);
    } else {
      c[i] = 0.0;
    }
  }
  return c;
}

Box make_box(Vector lb, Vector ub) {
  if (lb.size() != ub.size()) throw DimensionError(dims("box lb vs ub length", lb.size(), ub.size()));
  for (std::size_t i = 0; i < lb.size(); ++i) {
    if (std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] > ub[i]) {
      std::ostringstream os;
      os << "box invariant lb <= ub violated at index " << i;
      throw std::invalid_argument(os.str());
    }
  }
  return Box{std::move(lb), std::move(ub)};
}

ScopedMatVecProfile::ScopedMatVecProfile()
    : previously_enabled_(tl_profile.enabled), saved_(tl_profile.profile) {
  tl_profile.enabled = true;
  tl_profile.profile = {};
}

ScopedMatVecProfile::~ScopedMatVecProfile() {
  tl_profile.enabled = previously_enabled_;
  tl_profile.profile = saved_;
}

MatVecProfile ScopedMatVecProfile::snapshot() const { return tl_profile.profile; }

Vector mat_vec(const DenseMatrix& m, std::span<const double> v) {
  Vector out(m.rows());
  mat_vec_into(m, v, out);
  return out;
}

void mat_vec_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out) {
  if (m.cols() != v.size()) throw DimensionError(dims("mat_vec cols vs len(v)", m.cols(), v.size()));
  if (m.rows() != out.size())
    throw DimensionError(dims("mat_vec rows vs len(out)", m.rows(), out.size()));
  ProfileTimer timer(2ull * m.rows() * m.cols());
  const double* a = m.data().data();
  const std::size_t cols = m.cols();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = a + i * cols;
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += r[j] * v[j];
    out[i] = s;
  }
}

void mat_t_vec_into(const DenseMatrix& m, std::span<const double> v, std::span<double> out) {
  if (m.rows() != v.size()) throw DimensionError(dims("mat_t_vec rows vs len(v)", m.rows(), v.size()));
  if (m.cols() != out.size())
    throw DimensionError(dims("mat_t_vec cols vs len(out)", m.cols(), out.size()));
  ProfileTimer timer(2ull * m.rows() * m.cols());
  std::fill(out.begin(), out.end(), 0.0);
  const double* a = m.data().data();
  const std::size_t cols = m.cols();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const double* r = a + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += vi * r[j];
  }
}

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError(dims("mat_mul inner dimensions", a.cols(), b.rows()));
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

DenseMatrix gram(const DenseMatrix& a) {
  DenseMatrix g(a.cols(), a.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto r = a.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ri = r[i];
      if (ri == 0.0) continue;
      auto gi = g.row(i);
      for (std::size_t j = i; j < a.cols(); ++j) gi[j] += ri * r[j];
    }
  }
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

EigExtremes symmetric_eig_extremes(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError(dims("eigenvalues need a square matrix", m.rows(), m.cols()));
  if (m.rows() == 0) throw DimensionError("eigenvalues of an empty matrix");
  if (!m.all_finite()) throw std::invalid_argument("matrix has non-finite entries");
  const std::size_t n = m.rows();
  DenseMatrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (m(i, j) + m(j, i));
  Vector diag, off;
  tridiagonalize(std::move(sym), diag, off);
  return {kth_eigenvalue(diag, off, 0), kth_eigenvalue(diag, off, n - 1)};
}

EigExtremes eig_extremes_spd(const DenseMatrix& q) {
  const EigExtremes e = symmetric_eig_extremes(q);
  if (!(e.lambda_min > 0.0)) {
    std::ostringstream os;
    os << "lambda_min(Q) = " << e.lambda_min
       << " <= 0: strong convexity violated (Assumption 1(b))";
    throw std::domain_error(os.str());
  }
  return e;
}

double spectral_norm(const DenseMatrix& m) {
  if (!m.all_finite()) throw std::invalid_argument("matrix has non-finite entries");
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  const DenseMatrix g = m.rows() < m.cols() ? gram(m.transposed()) : gram(m);
  return std::sqrt(std::max(0.0, symmetric_eig_extremes(g).lambda_max));
}

double frobenius_norm(const DenseMatrix& m) { return norm2(m.data()); }

Vector box_project(std::span<const double> v, const Box& box) {
  Vector out(v.begin(), v.end());
  box_project_inplace(out, box);
  return out;
}

void box_project_inplace(std::span<double> v, const Box& box) {
  if (v.size() != box.size()) throw DimensionError(dims("box_project len(v) vs len(lb)", v.size(), box.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], box.lb[i], box.ub[i]);
}

Vector nonneg_project(std::span<const double> v) {
  Vector out(v.size());
  // -0.0 maps to +0.0
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError(dims("dot lengths", a.size(), b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double dist2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError(dims("dist2 lengths", a.size(), b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError(dims("axpy lengths", x.size(), y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace dualqp
