#ifndef WCC_PROBLEM_HPP
#define WCC_PROBLEM_HPP

#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "wcc/common.hpp"
#include "wcc/geometry.hpp"

namespace wcc {

// ---------------------------------------------------------------------------
// Regularity constants. +inf marks a quantity an assumption does not require
// to be finite. The losses never come with paper-supplied values, so the
// concrete problems derive conservative bounds; the CLI flags them as such.
// ---------------------------------------------------------------------------
struct ProblemConstants {
  double rho = 0.0;   // weak-convexity modulus of f in x
  double mu = 0.0;    // strong-convexity modulus of r w.r.t. V
  double M_x = kInf;  // second-moment bound on the primal stochastic subgradient
  double M_y = kInf;  // second-moment bound on the dual stochastic subgradient (dual norm)
  double M_c = kInf;  // Lipschitz modulus of c(.) in the dual norm
  double L_x = kInf;  // Lipschitz modulus of the per-component primal gradient
  double L_y = kInf;  // Lipschitz modulus of the per-component dual gradient
  double D_x = kInf;  // primal diameter
  double D_y = kInf;  // dual diameter sqrt(2 max d - 2 min d)
  double Q_g = 0.0;   // oscillation of g over its domain
  double Q_r = 0.0;   // oscillation of r over its domain
};

// ---------------------------------------------------------------------------
// Closed-form inner maximum  max_y { y'c - r(y) }  over the simplex.
//   theta > 0: KL regularizer, softmax solution evaluated with max-shift.
//   theta = 0: vertex maximum, ties averaged uniformly.
// ---------------------------------------------------------------------------
struct InnerMaxResult {
  double value = 0.0;
  Vec y_star;
};

inline InnerMaxResult inner_max_closed_form(const Vec& c, double theta) {
  require(theta >= 0.0, "inner_max_closed_form: theta must be nonnegative");
  const int n = static_cast<int>(c.size());
  require(n >= 1, "inner_max_closed_form: empty payoff");
  InnerMaxResult res;
  res.y_star.resize(n);
  const double cmax = c.maxCoeff();
  if (theta == 0.0) {
    res.value = cmax;
    int ties = 0;
    for (int i = 0; i < n; ++i) ties += (c[i] == cmax) ? 1 : 0;
    for (int i = 0; i < n; ++i) res.y_star[i] = (c[i] == cmax) ? 1.0 / ties : 0.0;
    return res;
  }
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    res.y_star[i] = std::exp((c[i] - cmax) / theta);
    z += res.y_star[i];
  }
  res.y_star /= z;
  res.value = cmax + theta * (std::log(z) - std::log(static_cast<double>(n)));
  return res;
}

// ---------------------------------------------------------------------------
// Truncated logistic loss  phi_alpha(l(x; a, b))  with
//   l(x; a, b) = log(1 + exp(-b a'x)),  phi_alpha(s) = alpha log(1 + s/alpha).
// ---------------------------------------------------------------------------
namespace detail {
inline double softplus(double t) {
  // max(t,0) + log1p(exp(-|t|)) is stable for |t| large
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}
// Partial Fisher-Yates draw of k distinct indices from {0..n-1}.
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}
}  // namespace detail

inline double truncated_logistic(const Vec& x, const Vec& a, double b, double alpha, Vec* grad) {
  require(alpha > 0.0, "truncated_logistic: alpha must be positive");
  const double margin = b * a.dot(x);
  const double loss = detail::softplus(-margin);
  const double value = alpha * std::log1p(loss / alpha);
  if (grad) {
    const double dphi = 1.0 / (1.0 + loss / alpha);
    *grad = (-b * dphi * detail::sigmoid(-margin)) * a;
  }
  return value;
}

// Curvature bound: sup |(phi_alpha o softplus)''| along any unit direction.
inline double truncation_curvature(double alpha) { return 1.0 / alpha + 0.25; }

// ---------------------------------------------------------------------------
// Problem interface. All shipped instances are linear in y:
//   f(x, y) = y'c(x)  with  c(x) = (f_1(x), ..., f_q(x)).
// The finite-sum decomposition used by the variance-reduced solver may index
// a different space than the payoff (see RobustMultiDist), hence the separate
// num_sum_components / sum_component_grad pair.
// ---------------------------------------------------------------------------
class WccProblem {
 public:
  virtual ~WccProblem() = default;

  virtual int primal_dim() const = 0;
  virtual int dual_dim() const = 0;
  virtual const PrimalConstraint& constraint() const = 0;
  virtual const DualRegularizer& dual_reg() const = 0;
  virtual const BregmanGeometry& geom() const = 0;
  virtual const ProblemConstants& constants() const = 0;
  virtual bool linear_in_y() const { return true; }
  virtual bool smooth() const { return true; }

  // Payoff coordinate k: value f_k(x) and its gradient.
  virtual void payoff_component(int k, const Vec& x, double& value, Vec& grad) const = 0;

  // Number of stochastic-subgradient evaluations equivalent to one data pass;
  // also the index space of the finite-sum decomposition.
  virtual int num_sum_components() const = 0;

  virtual Vec full_dual_payoff(const Vec& x) const {
    Vec c(dual_dim());
    Vec g(primal_dim());
    for (int k = 0; k < dual_dim(); ++k) {
      double v;
      payoff_component(k, x, v, g);
      c[k] = v;
    }
    return c;
  }

  // Unbiased stochastic subgradient pair, averaged over the batch. Default is
  // the single-index estimator for q = n problems: sampling i contributes
  // (n y_i grad f_i(x), n f_i(x) e_i), whose mean is (sum_i y_i grad f_i, c(x)).
  // Batches sample without replacement, so batch = n collapses the estimator
  // to its mean exactly.
  virtual void stoch_subgrad(const Vec& x, const Vec& y, int batch, Rng& rng, Vec& g_x,
                             Vec& g_y) const {
    require(batch >= 1, "stoch_subgrad: batch must be positive");
    require(dual_dim() == num_sum_components(),
            "stoch_subgrad: default estimator needs q == n");
    const int n = num_sum_components();
    if (n == 0) throw config_error("stoch_subgrad: empty dataset");
    require(batch <= n, "stoch_subgrad: batch cannot exceed the component count");
    g_x = Vec::Zero(primal_dim());
    g_y = Vec::Zero(dual_dim());
    Vec grad(primal_dim());
    auto accumulate = [&](int i) {
      double v;
      payoff_component(i, x, v, grad);
      g_x += (static_cast<double>(n) * y[i]) * grad;
      g_y[i] += static_cast<double>(n) * v;
    };
    if (batch == 1) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      accumulate(pick(rng));
    } else if (batch == n) {
      for (int i = 0; i < n; ++i) accumulate(i);
    } else {
      for (int i : detail::sample_without_replacement(n, batch, rng)) accumulate(i);
    }
    g_x /= batch;
    g_y /= batch;
  }

  // Gradient of the l-th summand of f(x,y) = (1/n) sum_l f_l(x,y). Default is
  // the q = n convention f_l(x,y) = n y_l f_l(x).
  virtual void sum_component_grad(int l, const Vec& x, const Vec& y, Vec& g_x, Vec& g_y) const {
    require(dual_dim() == num_sum_components(),
            "sum_component_grad: default decomposition needs q == n");
    require(l >= 0 && l < num_sum_components(), "sum_component_grad: index out of range");
    const int n = num_sum_components();
    double v;
    Vec grad(primal_dim());
    payoff_component(l, x, v, grad);
    g_x = (static_cast<double>(n) * y[l]) * grad;
    g_y = Vec::Zero(dual_dim());
    g_y[l] = static_cast<double>(n) * v;
  }

  // Full gradient of f, the average of the summand gradients.
  void full_grad(const Vec& x, const Vec& y, Vec& g_x, Vec& g_y) const {
    const int n = num_sum_components();
    g_x = Vec::Zero(primal_dim());
    g_y = Vec::Zero(dual_dim());
    Vec cx(primal_dim()), cy(dual_dim());
    for (int l = 0; l < n; ++l) {
      sum_component_grad(l, x, y, cx, cy);
      g_x += cx;
      g_y += cy;
    }
    g_x /= n;
    g_y /= n;
  }

  double f_value(const Vec& x, const Vec& y) const { return y.dot(full_dual_payoff(x)); }

  // Smoothness modulus of psi(x) = max_y y'c(x) - r(y) when theta > 0;
  // +inf when unavailable.
  virtual double psi_smoothness() const { return kInf; }
};

inline double weak_convexity_bound(const WccProblem& problem) { return problem.constants().rho; }

// ---------------------------------------------------------------------------
// Distributionally robust learning with the truncated logistic loss:
//   f_i(x) = phi_alpha(log(1 + exp(-b_i a_i'x))),  q = n.
// ---------------------------------------------------------------------------
class DroTruncatedLogistic : public WccProblem {
 public:
  DroTruncatedLogistic(Mat features, Vec labels, double alpha, double theta,
                       PrimalConstraint constraint = PrimalConstraint::unconstrained(),
                       double floor = 1e-12)
      : features_(std::move(features)),
        labels_(std::move(labels)),
        alpha_(alpha),
        constraint_(std::move(constraint)),
        reg_(theta > 0.0 ? DualRegularizer::kl_to_uniform(theta)
                         : DualRegularizer::simplex_indicator()),
        geom_(BregmanGeometry::entropy_on_simplex(static_cast<int>(features_.rows()), floor)) {
    require(alpha_ > 0.0, "DroTruncatedLogistic: alpha must be positive");
    require(features_.rows() == labels_.size(), "DroTruncatedLogistic: row/label mismatch");
    if (features_.rows() == 0) throw config_error("DroTruncatedLogistic: empty dataset");
    derive_constants();
  }

  int primal_dim() const override { return static_cast<int>(features_.cols()); }
  int dual_dim() const override { return static_cast<int>(features_.rows()); }
  const PrimalConstraint& constraint() const override { return constraint_; }
  const DualRegularizer& dual_reg() const override { return reg_; }
  const BregmanGeometry& geom() const override { return geom_; }
  const ProblemConstants& constants() const override { return constants_; }
  int num_sum_components() const override { return dual_dim(); }

  void payoff_component(int k, const Vec& x, double& value, Vec& grad) const override {
    require(k >= 0 && k < dual_dim(), "payoff_component: index out of range");
    value = truncated_logistic(x, features_.row(k).transpose(), labels_[k], alpha_, &grad);
  }

  double psi_smoothness() const override {
    if (reg_.theta <= 0.0) return kInf;
    return curvature_bound_ + 2.0 * grad_bound_ * grad_bound_ / reg_.theta;
  }

  double alpha() const { return alpha_; }
  double theta() const { return reg_.theta; }
  const Mat& features() const { return features_; }
  const Vec& labels() const { return labels_; }

  // rho = max_i ||a_i||^2 / alpha from the curvature bound
  // (phi_alpha o l)'' >= -(1/alpha) ||a||^2.
  static double weak_convexity_bound(const Mat& features, double alpha) {
    return features.rowwise().squaredNorm().maxCoeff() / alpha;
  }

 private:
  void derive_constants() {
    const int n = dual_dim();
    const double G = features_.rowwise().norm().maxCoeff();
    const double H = truncation_curvature(alpha_) * G * G;
    constants_.rho = weak_convexity_bound(features_, alpha_);
    constants_.mu = reg_.mu();
    constants_.M_x = std::sqrt(static_cast<double>(n)) * G;
    constants_.M_c = G;
    constants_.L_x = n * (H + G);
    constants_.L_y = n * G;
    constants_.D_x = constraint_.diameter();
    constants_.D_y = geom_.dual_diameter();
    constants_.Q_g = 0.0;
    constants_.Q_r = reg_.oscillation(n);
    const double xmax = max_primal_norm(constraint_);
    constants_.M_y =
        std::isfinite(xmax)
            ? n * (alpha_ * std::log1p(detail::softplus(G * xmax) / alpha_))
            : kInf;
    grad_bound_ = G;
    curvature_bound_ = H;
  }

  static double max_primal_norm(const PrimalConstraint& c) {
    switch (c.kind) {
      case ConstraintKind::free: return kInf;
      case ConstraintKind::l2_ball: return c.radius;
      case ConstraintKind::box: return c.lo.cwiseAbs().cwiseMax(c.hi.cwiseAbs()).norm();
    }
    return kInf;
  }

  Mat features_;
  Vec labels_;
  double alpha_;
  PrimalConstraint constraint_;
  DualRegularizer reg_;
  BregmanGeometry geom_;
  ProblemConstants constants_;
  double grad_bound_ = 0.0;
  double curvature_bound_ = 0.0;
};

// ---------------------------------------------------------------------------
// Robust learning over m datasets sharing the truncated logistic loss:
//   f_g(x) = mean truncated loss over dataset g,  q = m.
// The stochastic oracle samples one point per group; the finite-sum
// decomposition indexes data positions, so all groups must have equal size.
// ---------------------------------------------------------------------------
class RobustMultiDist : public WccProblem {
 public:
  struct Group {
    Mat features;
    Vec labels;
  };

  RobustMultiDist(std::vector<Group> groups, double alpha, double theta,
                  PrimalConstraint constraint = PrimalConstraint::unconstrained(),
                  double floor = 1e-12)
      : groups_(std::move(groups)),
        alpha_(alpha),
        constraint_(std::move(constraint)),
        reg_(theta > 0.0 ? DualRegularizer::kl_to_uniform(theta)
                         : DualRegularizer::simplex_indicator()),
        geom_(BregmanGeometry::entropy_on_simplex(static_cast<int>(groups_.size()), floor)) {
    require(alpha_ > 0.0, "RobustMultiDist: alpha must be positive");
    if (groups_.empty()) throw config_error("RobustMultiDist: no groups");
    group_size_ = static_cast<int>(groups_.front().features.rows());
    for (const auto& g : groups_) {
      if (g.features.rows() == 0) throw config_error("RobustMultiDist: empty group");
      require(g.features.rows() == g.labels.size(), "RobustMultiDist: row/label mismatch");
      if (g.features.rows() != group_size_ || g.features.cols() != groups_.front().features.cols())
        throw config_error("RobustMultiDist: groups must share shape");
    }
    derive_constants();
  }

  int primal_dim() const override { return static_cast<int>(groups_.front().features.cols()); }
  int dual_dim() const override { return static_cast<int>(groups_.size()); }
  const PrimalConstraint& constraint() const override { return constraint_; }
  const DualRegularizer& dual_reg() const override { return reg_; }
  const BregmanGeometry& geom() const override { return geom_; }
  const ProblemConstants& constants() const override { return constants_; }
  int num_sum_components() const override { return group_size_; }

  // Group-mean loss and gradient; one evaluation touches a whole group.
  void payoff_component(int k, const Vec& x, double& value, Vec& grad) const override {
    require(k >= 0 && k < dual_dim(), "payoff_component: index out of range");
    const Group& g = groups_[k];
    value = 0.0;
    grad = Vec::Zero(primal_dim());
    Vec gi(primal_dim());
    for (int j = 0; j < group_size_; ++j) {
      value += truncated_logistic(x, g.features.row(j).transpose(), g.labels[j], alpha_, &gi);
      grad += gi;
    }
    value /= group_size_;
    grad /= group_size_;
  }

  // One draw samples a data point within each group; batches draw positions
  // without replacement per group.
  void stoch_subgrad(const Vec& x, const Vec& y, int batch, Rng& rng, Vec& g_x,
                     Vec& g_y) const override {
    require(batch >= 1 && batch <= group_size_,
            "stoch_subgrad: batch must be in [1, group size]");
    g_x = Vec::Zero(primal_dim());
    g_y = Vec::Zero(dual_dim());
    Vec grad(primal_dim());
    for (int g = 0; g < dual_dim(); ++g) {
      const Group& grp = groups_[g];
      std::vector<int> picks;
      if (batch == 1) {
        std::uniform_int_distribution<int> pick(0, group_size_ - 1);
        picks.push_back(pick(rng));
      } else {
        picks = detail::sample_without_replacement(group_size_, batch, rng);
      }
      for (int j : picks) {
        const double v =
            truncated_logistic(x, grp.features.row(j).transpose(), grp.labels[j], alpha_, &grad);
        g_x += y[g] * grad;
        g_y[g] += v;
      }
    }
    g_x /= batch;
    g_y /= batch;
  }

  // Position decomposition: f_l(x,y) = sum_g y_g loss_{g,l}(x).
  void sum_component_grad(int l, const Vec& x, const Vec& y, Vec& g_x, Vec& g_y) const override {
    require(l >= 0 && l < group_size_, "sum_component_grad: index out of range");
    g_x = Vec::Zero(primal_dim());
    g_y.resize(dual_dim());
    Vec grad(primal_dim());
    for (int g = 0; g < dual_dim(); ++g) {
      const Group& grp = groups_[g];
      g_y[g] =
          truncated_logistic(x, grp.features.row(l).transpose(), grp.labels[l], alpha_, &grad);
      g_x += y[g] * grad;
    }
  }

  double psi_smoothness() const override {
    if (reg_.theta <= 0.0) return kInf;
    return curvature_bound_ + 2.0 * grad_bound_ * grad_bound_ / reg_.theta;
  }

  double alpha() const { return alpha_; }
  double theta() const { return reg_.theta; }
  const std::vector<Group>& groups() const { return groups_; }

 private:
  void derive_constants() {
    double G = 0.0;
    for (const auto& g : groups_) G = std::max(G, g.features.rowwise().norm().maxCoeff());
    const double H = truncation_curvature(alpha_) * G * G;
    constants_.rho = G * G / alpha_;
    constants_.mu = reg_.mu();
    constants_.M_x = G;
    constants_.M_c = G;
    constants_.L_x = std::max(H, G) * std::sqrt(2.0);
    constants_.L_y = G;
    constants_.D_x = constraint_.diameter();
    constants_.D_y = geom_.dual_diameter();
    constants_.Q_r = reg_.oscillation(dual_dim());
    const double xmax = constraint_.kind == ConstraintKind::l2_ball ? constraint_.radius
                        : constraint_.kind == ConstraintKind::box
                            ? constraint_.lo.cwiseAbs().cwiseMax(constraint_.hi.cwiseAbs()).norm()
                            : kInf;
    constants_.M_y = std::isfinite(xmax)
                         ? alpha_ * std::log1p(detail::softplus(G * xmax) / alpha_)
                         : kInf;
    grad_bound_ = G;
    curvature_bound_ = H;
  }

  std::vector<Group> groups_;
  double alpha_;
  PrimalConstraint constraint_;
  DualRegularizer reg_;
  BregmanGeometry geom_;
  ProblemConstants constants_;
  int group_size_ = 0;
  double grad_bound_ = 0.0;
  double curvature_bound_ = 0.0;
};

}  // namespace wcc

#endif  // WCC_PROBLEM_HPP
