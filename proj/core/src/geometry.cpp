#include "isolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "isolab/errors.hpp"
#include "isolab/special.hpp"

namespace isolab {
namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_same_dim(std::size_t got, std::size_t want, const char* who) {
  if (got != want) {
    std::ostringstream msg;
    msg << who << ": dimension mismatch (" << got << " vs " << want << ")";
    throw DomainError(msg.str());
  }
}

double log_marginal_normalizer(const PBallParams& params) {
  return ball_volume(params.p, params.n).log_value - ball_volume(params.p, params.n - 1).log_value;
}

// Exponent b of the Beta(1/p, b) law of |x_1|^p.
double beta_exponent(const PBallParams& params) { return (params.n - 1) / params.p + 1.0; }

}  // namespace

double lp_norm(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  if (p == 2.0) {
    for (double v : x) sum += (v / scale) * (v / scale);
    return scale * std::sqrt(sum);
  }
  if (p == 1.0) {
    for (double v : x) sum += std::abs(v);
    return sum;
  }
  for (double v : x) sum += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(sum, 1.0 / p);
}

double l2_norm(std::span<const double> x) { return lp_norm(x, 2.0); }

BallVolume ball_volume(double p, int n) {
  if (!(p >= 1.0)) throw DomainError("ball_volume: p must be >= 1");
  if (n < 0) throw DomainError("ball_volume: n must be >= 0");
  const double log_value =
      n * std::log(2.0 * std::tgamma(1.0 + 1.0 / p)) - special::log_gamma(1.0 + n / p);
  return {std::exp(log_value), log_value};
}

double marginal_normalizer(const PBallParams& params) {
  params.validate();
  return std::exp(log_marginal_normalizer(params));
}

double marginal_normalizer_quadrature(const PBallParams& params) {
  params.validate();
  const double exponent = (params.n - 1) / params.p;
  const double p = params.p;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto f = [&](double t) { return std::exp(exponent * std::log1p(-std::pow(t, p))); };
  const double half = integrator.integrate(f, 0.0, 1.0, 1e-14);
  return 2.0 * half;
}

double marginal_density(const PBallParams& params, double t) {
  params.validate();
  const double at = std::abs(t);
  if (!(at <= 1.0)) {
    std::ostringstream msg;
    msg << "marginal_density: |t| must be <= 1, got " << t;
    throw DomainError(msg.str());
  }
  if (params.n == 1) return 0.5;
  if (at == 1.0) return 0.0;
  const double exponent = (params.n - 1) / params.p;
  return std::exp(exponent * std::log1p(-std::pow(at, params.p)) - log_marginal_normalizer(params));
}

double marginal_sf(const PBallParams& params, double t) {
  params.validate();
  if (std::isnan(t)) throw DomainError("marginal_sf: t is NaN");
  if (t >= 1.0) return 0.0;
  if (t <= -1.0) return 1.0;
  if (t < 0.0) return 1.0 - marginal_sf(params, -t);
  if (t == 0.0) return 0.5;
  const double p = params.p;
  const double b = beta_exponent(params);
  const double u = std::pow(t, p);  // |x_1|^p ~ Beta(1/p, b)
  if (u < 0.5) return 0.5 * boost::math::ibetac(1.0 / p, b, u);
  const double y = -std::expm1(p * std::log(t));  // 1 - t^p without cancellation
  return 0.5 * boost::math::ibeta(b, 1.0 / p, y);
}

double marginal_cdf(const PBallParams& params, double t) { return marginal_sf(params, -t); }

double marginal_upper_quantile(const PBallParams& params, double a) {
  params.validate();
  if (!(a > 0.0 && a < 1.0)) {
    std::ostringstream msg;
    msg << "marginal_upper_quantile: a must lie in (0, 1), got " << a;
    throw DomainError(msg.str());
  }
  if (a == 0.5) return 0.0;
  if (a > 0.5) return -marginal_upper_quantile(params, 1.0 - a);
  const double p = params.p;
  const double b = beta_exponent(params);
  const double y = boost::math::ibeta_inv(b, 1.0 / p, 2.0 * a);  // y = 1 - t^p
  if (y < 0.5) return std::exp(std::log1p(-y) / p);
  const double u = boost::math::ibetac_inv(1.0 / p, b, 2.0 * a);
  return std::pow(u, 1.0 / p);
}

double marginal_second_moment(const PBallParams& params) {
  params.validate();
  const double exponent = (params.n - 1) / params.p;
  const double p = params.p;
  boost::math::quadrature::tanh_sinh<double> integrator;
  const auto f = [&](double t) {
    return t * t * std::exp(exponent * std::log1p(-std::pow(t, p)));
  };
  const double half = integrator.integrate(f, 0.0, 1.0, 1e-14);
  return 2.0 * half / marginal_normalizer(params);
}

// ---------------------------------------------------------------------------
// TestSet

TestSet::TestSet(Kind kind, std::size_t dim, std::vector<double> normal, double offset)
    : kind_(kind), dim_(dim), normal_(std::move(normal)), offset_(offset) {}

TestSet TestSet::half_space(std::vector<double> normal, double offset) {
  if (normal.empty()) throw DomainError("half_space: empty normal");
  const double norm = l2_norm(normal);
  if (std::abs(norm - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "half_space: normal must be a unit vector, ||xi||_2 = " << norm;
    throw DomainError(msg.str());
  }
  if (!std::isfinite(offset)) throw DomainError("half_space: offset must be finite");
  const std::size_t dim = normal.size();
  return TestSet(Kind::HalfSpace, dim, std::move(normal), offset);
}

TestSet TestSet::coordinate_half_space(std::size_t dim, std::size_t axis, double offset,
                                       bool negative) {
  if (axis >= dim) throw DomainError("coordinate_half_space: axis out of range");
  std::vector<double> normal(dim, 0.0);
  normal[axis] = negative ? -1.0 : 1.0;
  return half_space(std::move(normal), offset);
}

TestSet TestSet::euclid_complement(std::size_t dim, double radius) {
  if (dim == 0) throw DomainError("euclid_complement: dimension must be positive");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw DomainError("euclid_complement: radius must be finite and nonnegative");
  }
  return TestSet(Kind::EuclidComplement, dim, {}, radius);
}

bool TestSet::is_coordinate() const {
  if (kind_ != Kind::HalfSpace) return false;
  int nonzero = 0;
  for (double v : normal_) {
    if (v == 0.0) continue;
    if (std::abs(v) != 1.0) return false;
    ++nonzero;
  }
  return nonzero == 1;
}

bool TestSet::indicator(std::span<const double> x) const { return dist(x) == 0.0; }

double TestSet::dist(std::span<const double> x) const {
  require_same_dim(x.size(), dim_, "TestSet::dist");
  if (kind_ == Kind::HalfSpace) return std::max(0.0, offset_ - dot(x, normal_));
  return std::max(0.0, offset_ - l2_norm(x));
}

TestSet TestSet::enlarged(double eps) const {
  if (!(eps >= 0.0)) throw DomainError("TestSet::enlarged: eps must be nonnegative");
  if (kind_ == Kind::HalfSpace) return TestSet(kind_, dim_, normal_, offset_ - eps);
  return TestSet(kind_, dim_, {}, std::max(0.0, offset_ - eps));
}

std::optional<double> TestSet::analytic_measure(const PBallParams& params) const {
  params.validate();
  if (static_cast<std::size_t>(params.n) != dim_) return std::nullopt;
  if (kind_ == Kind::HalfSpace) {
    if (!(is_coordinate() || params.p == 2.0)) return std::nullopt;
    return marginal_sf(params, offset_);
  }
  if (!(params.p == 2.0 || params.n == 1)) return std::nullopt;
  if (offset_ >= 1.0) return 0.0;
  return 1.0 - std::pow(offset_, params.n);
}

std::optional<double> TestSet::analytic_boundary(const PBallParams& params) const {
  params.validate();
  if (static_cast<std::size_t>(params.n) != dim_) return std::nullopt;
  if (kind_ == Kind::HalfSpace) {
    if (!(is_coordinate() || params.p == 2.0)) return std::nullopt;
    const double t = offset_;
    if (t > 1.0 || t <= -1.0) return 0.0;
    if (t == 1.0) return params.n == 1 ? 0.5 : 0.0;
    return marginal_density(params, t);
  }
  if (!(params.p == 2.0 || params.n == 1)) return std::nullopt;
  const double r = offset_;
  if (r == 0.0 || r > 1.0) return 0.0;
  return params.n * std::pow(r, params.n - 1);
}

std::string TestSet::describe() const {
  std::ostringstream out;
  if (kind_ == Kind::HalfSpace) {
    if (is_coordinate()) {
      const auto it = std::find_if(normal_.begin(), normal_.end(), [](double v) { return v != 0.0; });
      const auto axis = std::distance(normal_.begin(), it);
      out << "halfspace(" << (*it < 0.0 ? "-" : "") << "e" << axis + 1 << ";t=" << offset_ << ")";
    } else {
      out << "halfspace(xi;t=" << offset_ << ")";
    }
  } else {
    out << "euclid_complement(r=" << offset_ << ")";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Cut-off functions

void CutoffParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw DomainError("cut-off constants must be positive");
}

double cutoff_h1(std::span<const double> x, const PBallParams& params, const CutoffParams& c) {
  params.validate();
  c.validate();
  const double scale = c.c1 * std::pow(params.n, params.radius_exponent());
  return clamp01(2.0 - scale * l2_norm(x));
}

double cutoff_h2(std::span<const double> z, const PBallParams& params, const CutoffParams& c) {
  params.validate();
  c.validate();
  const double scale = c.c2 * std::pow(params.n, -1.0 / params.p);
  return clamp01(scale * lp_norm(z, params.p) - 1.0);
}

double cutoff_h1_gradient(std::span<const double> x, const PBallParams& params,
                          const CutoffParams& c, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double scale = c.c1 * std::pow(params.n, params.radius_exponent());
  const double r = l2_norm(x);
  const double arg = 2.0 - scale * r;
  if (!(arg > 0.0 && arg < 1.0)) return 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = -scale * x[i] / r;
  return scale;
}

double cutoff_h2_gradient(std::span<const double> z, const PBallParams& params,
                          const CutoffParams& c, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double p = params.p;
  const double scale = c.c2 * std::pow(params.n, -1.0 / p);
  const double s = lp_norm(z, p);
  const double arg = scale * s - 1.0;
  if (!(arg > 0.0 && arg < 1.0)) return 0.0;
  const double denom = std::pow(s, p - 1.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = scale * sgn(z[i]) * std::pow(std::abs(z[i]), p - 1.0) / denom;
    sq += out[i] * out[i];
  }
  return std::sqrt(sq);
}

// ---------------------------------------------------------------------------
// Jacobian of the push-forward map

namespace {

struct JacobianParts {
  std::size_t n;
  double s;                // ||z||_p
  std::vector<double> w;   // sgn(z_i)|z_i|^{p-1} / s^p, length n+1
};

JacobianParts jacobian_parts(std::span<const double> z, double p) {
  if (z.size() < 2) throw DomainError("jacobian_T: z must have at least 2 coordinates");
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("jacobian_T: p must lie in [1, 2]");
  if (std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; })) {
    throw SingularInputError("jacobian_T: z = 0");
  }
  if (p < 2.0 && std::any_of(z.begin(), z.end(), [](double v) { return v == 0.0; })) {
    throw KinkError("jacobian_T: zero coordinate where the l_p norm is not smooth");
  }
  JacobianParts parts{z.size() - 1, lp_norm(z, p), std::vector<double>(z.size())};
  const double sp = std::pow(parts.s, p);
  for (std::size_t i = 0; i < z.size(); ++i) {
    parts.w[i] = sgn(z[i]) * std::pow(std::abs(z[i]), p - 1.0) / sp;
  }
  return parts;
}

}  // namespace

JacobianNorms jacobian_norms(std::span<const double> z, double p) {
  const JacobianParts parts = jacobian_parts(z, p);
  const std::size_t n = parts.n;
  const auto x = z.first(n);
  const std::span<const double> wx(parts.w.data(), n);  // first n entries of w
  const double w_sq = dot(parts.w, parts.w);

  // J J^T s^2 = I - w' x^T - x w'^T + |w|^2 x x^T. Work in the orthonormal
  // basis e1 = x/|x|, e2 = normalized component of w' orthogonal to e1.
  const double alpha = l2_norm(x);
  double top = 1.0;
  if (alpha > 0.0) {
    double beta = 0.0;
    for (std::size_t j = 0; j < n; ++j) beta += wx[j] * x[j] / alpha;
    double gamma_sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = wx[j] - beta * x[j] / alpha;
      gamma_sq += r * r;
    }
    const double gamma = std::sqrt(gamma_sq);
    const double m11 = 1.0 - 2.0 * alpha * beta + w_sq * alpha * alpha;
    const double m12 = -alpha * gamma;
    const double m22 = 1.0;
    const double mean = 0.5 * (m11 + m22);
    const double half_diff = 0.5 * (m11 - m22);
    const bool two_dim = n >= 2 && gamma > 0.0;
    const double span_top = two_dim ? mean + std::hypot(half_diff, m12) : m11;
    const std::size_t span_rank = two_dim ? 2 : 1;
    top = n > span_rank ? std::max(span_top, 1.0) : span_top;
  }
  const double op_norm = std::sqrt(std::max(top, 0.0)) / parts.s;
  const double image_norm = alpha / parts.s;
  const double bound =
      (1.0 + std::pow(static_cast<double>(n), (2.0 - p) / (2.0 * p)) * image_norm) / parts.s;
  return {op_norm, bound, parts.s, image_norm};
}

JacobianResult jacobian_T(std::span<const double> z, double p) {
  const JacobianParts parts = jacobian_parts(z, p);
  const std::size_t n = parts.n;
  JacobianResult result;
  result.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + 1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      const double delta = (i == j) ? 1.0 : 0.0;
      result.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          (delta - z[j] * parts.w[i]) / parts.s;
    }
  }
  const JacobianNorms norms = jacobian_norms(z, p);
  result.op_norm = norms.op_norm;
  result.pointwise_bound = norms.pointwise_bound;
  return result;
}

void jacobian_adjoint_apply(std::span<const double> z, double p, std::span<const double> v,
                            std::span<double> out) {
  const JacobianParts parts = jacobian_parts(z, p);
  const std::size_t n = parts.n;
  require_same_dim(v.size(), n, "jacobian_adjoint_apply");
  require_same_dim(out.size(), n + 1, "jacobian_adjoint_apply");
  // (D*T v)_i = sum_j dT_j/dz_i v_j = (v_i [i <= n] - w_i <x, v>) / s
  const double xv = dot(z.first(n), v);
  for (std::size_t i = 0; i <= n; ++i) {
    out[i] = ((i < n ? v[i] : 0.0) - parts.w[i] * xv) / parts.s;
  }
}

double operator_norm_svd(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double operator_norm_power(const Eigen::MatrixXd& m, double tol, int max_iter) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd gram = m * m.transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.rows()).normalized();
  // A deterministic, non-symmetric start avoids orthogonality to the top
  // eigenvector for structured inputs.
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += 1e-3 * static_cast<double>(i + 1);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double updated = next.dot(gram * next);
    const bool converged = std::abs(updated - lambda) <= tol * std::max(1.0, std::abs(updated));
    lambda = updated;
    v = next;
    if (converged && it > 0) return std::sqrt(std::max(lambda, 0.0));
  }
  throw NumericError("operator_norm_power: power iteration did not converge");
}

// ---------------------------------------------------------------------------
// Gradient norms

double grad_norm(const ScalarField& f, std::span<const double> x) {
  if (f.gradient) {
    std::vector<double> g(x.size());
    f.gradient(x, g);
    const double norm = l2_norm(g);
    if (!std::isfinite(norm)) throw NumericError("grad_norm: non-finite analytic gradient");
    return norm;
  }
  const double h = 1e-6 * (1.0 + l2_norm(x));
  const double f0 = f.value(x);
  if (!std::isfinite(f0)) throw NumericError("grad_norm: non-finite function value");
  std::vector<double> probe(x.begin(), x.end());
  double forward_sq = 0.0;
  double backward_sq = 0.0;
  double central_sq = 0.0;
  bool kink = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f.value(probe);
    probe[i] = x[i] - h;
    const double fm = f.value(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("grad_norm: non-finite function value near x");
    }
    const double forward = (fp - f0) / h;
    const double backward = (f0 - fm) / h;
    const double central = 0.5 * (forward + backward);
    forward_sq += forward * forward;
    backward_sq += backward * backward;
    central_sq += central * central;
    if (std::abs(forward - backward) > 1e-3 * std::max({1.0, std::abs(forward), std::abs(backward)})) {
      kink = true;
    }
  }
  if (kink) return std::sqrt(std::max(forward_sq, backward_sq));
  return std::sqrt(central_sq);
}

// ---------------------------------------------------------------------------
// PlateauFunction

PlateauFunction::PlateauFunction(Kind kind, std::size_t dim, std::vector<double> normal,
                                 double level, double width)
    : kind_(kind), dim_(dim), normal_(std::move(normal)), level_(level), width_(width) {}

PlateauFunction PlateauFunction::constant(std::size_t dim, double level) {
  if (!(level >= 0.0 && level <= 1.0)) throw DomainError("plateau constant must lie in [0, 1]");
  return PlateauFunction(Kind::Constant, dim, {}, level, 0.0);
}

PlateauFunction PlateauFunction::half_space_ramp(std::vector<double> normal, double t,
                                                 double width) {
  if (!(width > 0.0)) throw DomainError("half_space_ramp: width must be positive");
  const double norm = l2_norm(normal);
  if (std::abs(norm - 1.0) > 1e-12) throw DomainError("half_space_ramp: normal must be a unit vector");
  const std::size_t dim = normal.size();
  return PlateauFunction(Kind::HalfSpaceRamp, dim, std::move(normal), t, width);
}

PlateauFunction PlateauFunction::radial_ramp(std::size_t dim, double r, double width) {
  if (!(width > 0.0) || !(r >= width)) {
    throw DomainError("radial_ramp: need 0 < width <= r");
  }
  return PlateauFunction(Kind::RadialRamp, dim, {}, r, width);
}

double PlateauFunction::value(std::span<const double> x) const {
  require_same_dim(x.size(), dim_, "PlateauFunction::value");
  switch (kind_) {
    case Kind::Constant:
      return level_;
    case Kind::HalfSpaceRamp:
      return clamp01((dot(x, normal_) - (level_ - width_)) / width_);
    case Kind::RadialRamp:
      return clamp01((l2_norm(x) - (level_ - width_)) / width_);
  }
  return 0.0;
}

double PlateauFunction::gradient(std::span<const double> x, std::span<double> out) const {
  require_same_dim(x.size(), dim_, "PlateauFunction::gradient");
  std::fill(out.begin(), out.end(), 0.0);
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::HalfSpaceRamp: {
      const double arg = (dot(x, normal_) - (level_ - width_)) / width_;
      if (!(arg > 0.0 && arg < 1.0)) return 0.0;
      for (std::size_t i = 0; i < dim_; ++i) out[i] = normal_[i] / width_;
      return 1.0 / width_;
    }
    case Kind::RadialRamp: {
      const double r = l2_norm(x);
      const double arg = (r - (level_ - width_)) / width_;
      if (!(arg > 0.0 && arg < 1.0)) return 0.0;
      for (std::size_t i = 0; i < dim_; ++i) out[i] = x[i] / (r * width_);
      return 1.0 / width_;
    }
  }
  return 0.0;
}

double PlateauFunction::grad_norm(std::span<const double> x) const {
  std::vector<double> g(dim_);
  return gradient(x, g);
}

ScalarField PlateauFunction::as_field() const {
  const PlateauFunction self = *this;
  return ScalarField{
      [self](std::span<const double> x) { return self.value(x); },
      [self](std::span<const double> x, std::span<double> out) { self.gradient(x, out); }};
}

std::optional<TestSet> PlateauFunction::superlevel_set(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("superlevel_set: u must lie in [0, 1)");
  switch (kind_) {
    case Kind::Constant:
      return std::nullopt;
    case Kind::HalfSpaceRamp:
      return TestSet::half_space(normal_, level_ - width_ + u * width_);
    case Kind::RadialRamp:
      return TestSet::euclid_complement(dim_, level_ - width_ + u * width_);
  }
  return std::nullopt;
}

std::string PlateauFunction::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::Constant:
      out << "constant(" << level_ << ")";
      break;
    case Kind::HalfSpaceRamp:
      out << "halfspace_ramp(t=" << level_ << ";w=" << width_ << ")";
      break;
    case Kind::RadialRamp:
      out << "radial_ramp(r=" << level_ << ";w=" << width_ << ")";
      break;
  }
  return out.str();
}

}  // namespace isolab
