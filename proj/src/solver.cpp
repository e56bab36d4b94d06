#include "h2blend/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "kkt_factorization.hpp"

namespace h2blend {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;
constexpr double kSigmaBound = 1e10;
constexpr double kCentrality = 1e-6;
constexpr double kPolish = 1e-6;
constexpr int kMaxCentering = 30;

using Eigen::MatrixXd;
using Eigen::VectorXd;

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Eval {
  double f = 0.0;
  VectorXd grad, h, g;
  MatrixXd jh, jg;
  bool finite = true;
};

struct Iterate {
  VectorXd x, s, yh, yg, zl, zu, v;
};

class InteriorPoint {
 public:
  InteriorPoint(const AssembledProblem& pb, const SolverOptions& opt)
      : pb_(pb), opt_(opt), n_(pb.num_variables()), me_(pb.num_equalities()),
        mi_(pb.num_inequalities()), lo_(pb.lower_bounds()), up_(pb.upper_bounds()) {
    has_lo_.resize(n_);
    has_up_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      has_lo_[k] = std::isfinite(lo_[k]);
      has_up_[k] = std::isfinite(up_[k]);
    }
  }

  Solution run(const VectorXd& x0, const Solution* warm);

 private:
  Eval evaluate(const VectorXd& x, bool derivatives) const {
    Eval e;
    e.f = pb_.objective(x);
    e.h = pb_.equality_residuals(x);
    e.g = pb_.inequality_residuals(x);
    e.finite = std::isfinite(e.f) && e.h.allFinite() && e.g.allFinite();
    if (derivatives && e.finite) {
      e.grad = pb_.objective_gradient(x);
      e.jh = pb_.equality_jacobian(x);
      e.jg = pb_.inequality_jacobian(x);
      e.finite = e.grad.allFinite() && e.jh.allFinite() && e.jg.allFinite();
    }
    return e;
  }

  VectorXd push_into_bounds(VectorXd x, double push) const {
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k] && has_up_[k]) {
        const double pl = std::min(push * std::max(1.0, std::abs(lo_[k])), push * (up_[k] - lo_[k]));
        const double pu = std::min(push * std::max(1.0, std::abs(up_[k])), push * (up_[k] - lo_[k]));
        x[k] = std::clamp(x[k], lo_[k] + pl, up_[k] - pu);
      } else if (has_lo_[k]) {
        x[k] = std::max(x[k], lo_[k] + push * std::max(1.0, std::abs(lo_[k])));
      } else if (has_up_[k]) {
        x[k] = std::min(x[k], up_[k] - push * std::max(1.0, std::abs(up_[k])));
      }
    }
    return x;
  }

  double barrier_merit(const VectorXd& x, const VectorXd& s, const Eval& e, double nu) const {
    double phi = e.f;
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k]) phi -= mu_ * std::log(x[k] - lo_[k]);
      if (has_up_[k]) phi -= mu_ * std::log(up_[k] - x[k]);
    }
    for (int i = 0; i < mi_; ++i) phi -= mu_ * std::log(s[i]);
    return phi + nu * theta(e, s);
  }

  static double theta(const Eval& e, const VectorXd& s) {
    return e.h.lpNorm<1>() + (e.g - s).lpNorm<1>();
  }

  double max_step(const VectorXd& v, const VectorXd& dv, double tau) const {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (dv[i] < 0.0) a = std::min(a, -tau * v[i] / dv[i]);
    return a;
  }

  VectorXd dist_lo(const VectorXd& x) const {
    VectorXd d = VectorXd::Constant(n_, kInf);
    for (int k = 0; k < n_; ++k)
      if (has_lo_[k]) d[k] = x[k] - lo_[k];
    return d;
  }
  VectorXd dist_up(const VectorXd& x) const {
    VectorXd d = VectorXd::Constant(n_, kInf);
    for (int k = 0; k < n_; ++k)
      if (has_up_[k]) d[k] = up_[k] - x[k];
    return d;
  }

  // Returns (dual, primal, complementarity) residual norms at barrier parameter mu.
  std::array<double, 3> residuals(const Iterate& it, const Eval& e, double mu) const {
    VectorXd rx = e.grad + e.jh.transpose() * it.yh + e.jg.transpose() * it.yg - it.zl + it.zu;
    VectorXd rs = -it.yg - it.v;
    const double dual = std::max(inf_norm(rx), inf_norm(rs));
    const double primal = std::max(inf_norm(e.h), inf_norm(e.g - it.s));
    double comp = 0.0;
    const VectorXd dl = dist_lo(it.x), du = dist_up(it.x);
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k]) comp = std::max(comp, std::abs(dl[k] * it.zl[k] - mu));
      if (has_up_[k]) comp = std::max(comp, std::abs(du[k] * it.zu[k] - mu));
    }
    for (int i = 0; i < mi_; ++i) comp = std::max(comp, std::abs(it.s[i] * it.v[i] - mu));
    return {dual, primal, comp};
  }

  // Largest relative deviation of the complementarity products from mu.
  double centrality(const Iterate& it, double mu) const {
    double worst = 0.0;
    const VectorXd dl = dist_lo(it.x), du = dist_up(it.x);
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k]) worst = std::max(worst, std::abs(dl[k] * it.zl[k] / mu - 1.0));
      if (has_up_[k]) worst = std::max(worst, std::abs(du[k] * it.zu[k] / mu - 1.0));
    }
    for (int i = 0; i < mi_; ++i) worst = std::max(worst, std::abs(it.s[i] * it.v[i] / mu - 1.0));
    return worst;
  }

  void least_squares_multipliers(Iterate& it, const Eval& e) const {
    if (me_ == 0) return;
    VectorXd rhs = -(e.grad + e.jg.transpose() * it.yg - it.zl + it.zu);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(e.jh.transpose());
    VectorXd y = cod.solve(rhs);
    if (y.allFinite() && inf_norm(y) <= 1e3) it.yh = y;
    else it.yh.setZero();
  }

  void reset_bound_duals(Iterate& it) const {
    const VectorXd dl = dist_lo(it.x), du = dist_up(it.x);
    for (int k = 0; k < n_; ++k) {
      it.zl[k] = has_lo_[k] ? mu_ / dl[k] : 0.0;
      it.zu[k] = has_up_[k] ? mu_ / du[k] : 0.0;
    }
    for (int i = 0; i < mi_; ++i) it.v[i] = mu_ / it.s[i];
    it.yg = -it.v;
  }

  bool restoration(Iterate& it, Eval& e);
  Solution finish(const Iterate& it, const Eval& e, SolveStatus status, int iterations);

  const AssembledProblem& pb_;
  const SolverOptions& opt_;
  const int n_, me_, mi_;
  const VectorXd& lo_;
  const VectorXd& up_;
  std::vector<bool> has_lo_, has_up_;
  double mu_ = 0.1;
  std::vector<IterationRecord> log_;
};

bool InteriorPoint::restoration(Iterate& it, Eval& e) {
  // Levenberg-Marquardt on the constraint residual c(x, s) = [h(x); g(x) - s],
  // staying strictly inside the variable and slack bounds.
  const double theta0 = theta(e, it.s);
  double lm = 1e-4;
  VectorXd x = it.x, s = it.s;
  Eval cur = e;
  for (int k = 0; k < 200; ++k) {
    const int nv = n_ + mi_;
    MatrixXd jc = MatrixXd::Zero(me_ + mi_, nv);
    jc.topLeftCorner(me_, n_) = cur.jh;
    jc.bottomLeftCorner(mi_, n_) = cur.jg;
    jc.bottomRightCorner(mi_, mi_) = -MatrixXd::Identity(mi_, mi_);
    VectorXd c(me_ + mi_);
    c << cur.h, cur.g - s;
    // Proximity weights keep components near a bound from being pushed through it.
    VectorXd wdiag(nv);
    const VectorXd dl = dist_lo(x), du = dist_up(x);
    for (int j = 0; j < n_; ++j) {
      double d = std::min(dl[j], du[j]);
      wdiag[j] = std::isfinite(d) ? 1.0 / std::max(d * d, 1e-20) : 1.0;
      wdiag[j] = std::max(1.0, std::min(wdiag[j], 1e8));
    }
    for (int i = 0; i < mi_; ++i) wdiag[n_ + i] = std::max(1.0, std::min(1.0 / (s[i] * s[i]), 1e8));

    const MatrixXd jtj = jc.transpose() * jc;
    const VectorXd grad = jc.transpose() * c;
    bool accepted = false;
    while (lm < 1e12) {
      MatrixXd a = jtj;
      a.diagonal() += lm * wdiag;
      VectorXd d = a.ldlt().solve(-grad);
      if (!d.allFinite()) {
        lm *= 10.0;
        continue;
      }
      VectorXd dx = d.head(n_), ds = d.tail(mi_);
      double step = 1.0;
      const VectorXd dl2 = dist_lo(x), du2 = dist_up(x);
      for (int j = 0; j < n_; ++j) {
        if (has_lo_[j] && dx[j] < 0) step = std::min(step, -0.99 * dl2[j] / dx[j]);
        if (has_up_[j] && dx[j] > 0) step = std::min(step, 0.99 * du2[j] / dx[j]);
      }
      step = std::min(step, max_step(s, ds, 0.99));
      VectorXd xt = x + step * dx, st = s + step * ds;
      Eval et = evaluate(xt, true);
      if (et.finite) {
        VectorXd ct(me_ + mi_);
        ct << et.h, et.g - st;
        if (ct.squaredNorm() < (1.0 - 1e-4 * step) * c.squaredNorm()) {
          x = xt;
          s = st;
          cur = std::move(et);
          lm = std::max(1e-12, lm / 3.0);
          accepted = true;
          break;
        }
      }
      lm *= 10.0;
    }
    if (!accepted) break;
    const double th = theta(cur, s);
    if (th <= 0.9 * theta0 || th <= 0.1 * opt_.kkt_tolerance) {
      it.x = x;
      it.s = s;
      e = std::move(cur);
      reset_bound_duals(it);
      least_squares_multipliers(it, e);
      return true;
    }
  }
  return false;
}

Solution InteriorPoint::run(const VectorXd& x0, const Solution* warm) {
  const double tol = opt_.kkt_tolerance;
  // Driving the barrier well below the tolerance sharpens the active-set estimate.
  const double mu_min = 1e-3 * tol;
  int centering = 0;
  mu_ = warm ? opt_.warm_mu_init : opt_.mu_init;
  const double push = warm ? opt_.warm_mu_init : opt_.bound_push;

  Iterate it;
  it.x = push_into_bounds(x0, push);
  Eval e = evaluate(it.x, true);
  if (!e.finite) return finish(it, e, SolveStatus::NumericalFailure, 0);
  it.s = e.g.cwiseMax(push);
  it.yh = VectorXd::Zero(me_);
  it.yg = VectorXd::Zero(mi_);
  it.zl = VectorXd::Zero(n_);
  it.zu = VectorXd::Zero(n_);
  it.v = VectorXd::Zero(mi_);
  reset_bound_duals(it);
  if (warm && warm->eq_duals.size() == me_ && warm->ineq_duals.size() == mi_) {
    it.yh = warm->eq_duals;
    for (int i = 0; i < mi_; ++i) it.v[i] = std::max(warm->ineq_duals[i], mu_ / it.s[i]);
    it.yg = -it.v;
  } else {
    least_squares_multipliers(it, e);
  }

  double nu = 1e-2;
  double delta_last = 0.0;
  detail::SymmetricIndefiniteFactor fac;
  const int kdim = n_ + me_ + mi_;

  for (int iter = 0;; ++iter) {
    const auto r0 = residuals(it, e, 0.0);
    const double e0 = std::max({r0[0], r0[1], r0[2]});
    // once converged, keep polishing at fixed mu so degenerate multipliers
    // settle on the central path
    const bool polishing = e0 <= tol && mu_ <= mu_min;
    if (polishing && centering++ >= kMaxCentering) return finish(it, e, SolveStatus::Optimal, iter);
    if (iter >= opt_.max_iterations) return finish(it, e, SolveStatus::MaxIterations, iter);

    for (;;) {
      const auto rm = residuals(it, e, mu_);
      const double emu = std::max({rm[0], rm[1], rm[2]});
      if (emu > 10.0 * mu_ || mu_ <= mu_min) break;
      mu_ = std::max(mu_min, std::min(opt_.mu_reduction * mu_, std::pow(mu_, 1.5)));
    }
    const double tau = std::max(opt_.tau_min, 1.0 - mu_);

    const VectorXd dl = dist_lo(it.x), du = dist_up(it.x);
    VectorXd sigma_x = VectorXd::Zero(n_);
    VectorXd barrier_grad = e.grad;
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k]) {
        sigma_x[k] += it.zl[k] / dl[k];
        barrier_grad[k] -= mu_ / dl[k];
      }
      if (has_up_[k]) {
        sigma_x[k] += it.zu[k] / du[k];
        barrier_grad[k] += mu_ / du[k];
      }
    }
    const VectorXd sigma_s = it.v.cwiseQuotient(it.s);
    const VectorXd rx_mu = barrier_grad + e.jh.transpose() * it.yh + e.jg.transpose() * it.yg;

    VectorXd rhs(kdim);
    rhs.head(n_) = -rx_mu;
    rhs.segment(n_, me_) = -e.h;
    for (int i = 0; i < mi_; ++i)
      rhs[n_ + me_ + i] = -(e.g[i] - it.s[i]) + (it.yg[i] + mu_ / it.s[i]) / sigma_s[i];

    MatrixXd w = pb_.lagrangian_hessian(it.x, it.yh, -it.yg, 1.0);
    MatrixXd kkt = MatrixXd::Zero(kdim, kdim);
    kkt.topLeftCorner(n_, n_) = w;
    kkt.topLeftCorner(n_, n_).diagonal() += sigma_x;
    kkt.block(n_, 0, me_, n_) = e.jh;
    kkt.block(n_ + me_, 0, mi_, n_) = e.jg;
    kkt.block(0, n_, n_, me_) = e.jh.transpose();
    kkt.block(0, n_ + me_, n_, mi_) = e.jg.transpose();
    for (int i = 0; i < mi_; ++i) kkt(n_ + me_ + i, n_ + me_ + i) = -1.0 / sigma_s[i];

    double delta_w = 0.0, delta_c = 0.0;
    bool factored = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      MatrixXd k2 = kkt;
      if (delta_w > 0) k2.topLeftCorner(n_, n_).diagonal().array() += delta_w;
      if (delta_c > 0) k2.bottomRightCorner(me_ + mi_, me_ + mi_).diagonal().array() -= delta_c;
      const bool ok = fac.factor(k2) && !k2.hasNaN();
      const auto& in = fac.inertia();
      if (ok && in.positive == n_ && in.negative == me_ + mi_ && in.zero == 0) {
        factored = true;
        break;
      }
      if (in.zero > 0 || in.negative < me_ + mi_) delta_c = 1e-8 * std::pow(mu_, 0.25);
      if (delta_w == 0.0) {
        delta_w = delta_last == 0.0 ? opt_.delta_init : std::max(opt_.delta_init, delta_last / 3.0);
      } else {
        delta_w *= delta_last == 0.0 ? 100.0 : 8.0;
      }
      if (delta_w > 1e40) break;
    }
    if (!factored) return finish(it, e, SolveStatus::NumericalFailure, iter);
    if (delta_w > 0) delta_last = delta_w;

    const VectorXd sol = fac.solve(rhs);
    if (!sol.allFinite()) return finish(it, e, SolveStatus::NumericalFailure, iter);
    const VectorXd dx = sol.head(n_);
    const VectorXd dyh = sol.segment(n_, me_);
    const VectorXd dyg = sol.tail(mi_);
    VectorXd ds(mi_), dv(mi_), dzl(n_), dzu(n_);
    for (int i = 0; i < mi_; ++i) {
      ds[i] = (it.yg[i] + mu_ / it.s[i] + dyg[i]) / sigma_s[i];
      dv[i] = mu_ / it.s[i] - it.v[i] - sigma_s[i] * ds[i];
    }
    for (int k = 0; k < n_; ++k) {
      dzl[k] = has_lo_[k] ? mu_ / dl[k] - it.zl[k] - it.zl[k] / dl[k] * dx[k] : 0.0;
      dzu[k] = has_up_[k] ? mu_ / du[k] - it.zu[k] + it.zu[k] / du[k] * dx[k] : 0.0;
    }

    if (polishing && centrality(it, mu_) <= kCentrality) {
      bool small = true;
      for (int i = 0; i < mi_ && small; ++i)
        small = std::abs(ds[i]) <= kPolish * it.s[i] && std::abs(dv[i]) <= kPolish * it.v[i];
      for (int k = 0; k < n_ && small; ++k) {
        small = std::abs(dx[k]) <= kPolish * (1.0 + std::abs(it.x[k]));
        if (has_lo_[k]) small = small && std::abs(dx[k]) <= kPolish * dl[k];
        if (has_up_[k]) small = small && std::abs(dx[k]) <= kPolish * du[k];
      }
      for (int j = 0; j < me_ && small; ++j) small = std::abs(dyh[j]) <= kPolish * (1.0 + std::abs(it.yh[j]));
      if (small) return finish(it, e, SolveStatus::Optimal, iter);
    }

    double a_max = max_step(it.s, ds, tau);
    for (int k = 0; k < n_; ++k) {
      if (has_lo_[k] && dx[k] < 0) a_max = std::min(a_max, -tau * dl[k] / dx[k]);
      if (has_up_[k] && dx[k] > 0) a_max = std::min(a_max, tau * du[k] / dx[k]);
    }
    double a_dual = std::min({max_step(it.v, dv, tau), max_step(it.zl, dzl, tau), max_step(it.zu, dzu, tau)});

    // Penalty parameter and directional derivative of the l1 merit.
    const double th = theta(e, it.s);
    double grad_dot = barrier_grad.dot(dx);
    for (int i = 0; i < mi_; ++i) grad_dot -= mu_ / it.s[i] * ds[i];
    const double curv = std::max(0.0, dx.dot((w + MatrixXd(sigma_x.asDiagonal())) * dx) +
                                          ds.dot(sigma_s.cwiseProduct(ds)));
    if (th > 0.0) {
      const double nu_trial = (grad_dot + 0.5 * curv) / (0.9 * th);
      if (nu < nu_trial) nu = std::max(1.5 * nu_trial, nu + 1e-4);
    }
    const double dphi = grad_dot - nu * th;
    const double phi0 = barrier_merit(it.x, it.s, e, nu);
    const double slop = 10.0 * std::numeric_limits<double>::epsilon() * std::abs(phi0);

    double alpha = a_max;
    bool accepted = false;
    VectorXd x_new, s_new;
    Eval e_new;
    bool tiny = true;
    for (int k = 0; k < n_; ++k)
      if (std::abs(dx[k]) > 1e-15 * (1.0 + std::abs(it.x[k]))) tiny = false;
    for (int i = 0; i < mi_ && tiny; ++i)
      if (std::abs(ds[i]) > 1e-15 * (1.0 + std::abs(it.s[i]))) tiny = false;

    for (int trial = 0; trial < 60; ++trial) {
      x_new = it.x + alpha * dx;
      s_new = it.s + alpha * ds;
      e_new = evaluate(x_new, false);
      if (e_new.finite) {
        const double phi = barrier_merit(x_new, s_new, e_new, nu);
        if (std::isfinite(phi) && (phi <= phi0 + kArmijo * alpha * std::min(dphi, 0.0) + slop || tiny)) {
          accepted = true;
          break;
        }
        if (trial == 0 && theta(e_new, s_new) >= th) {
          // Second-order corrections.
          VectorXd xc = x_new, sc = s_new;
          Eval ec = e_new;
          double th_c = theta(e_new, s_new);
          for (int k_soc = 0; k_soc < 4 && !accepted; ++k_soc) {
            VectorXd rhs_soc = VectorXd::Zero(kdim);
            rhs_soc.segment(n_, me_) = -ec.h;
            rhs_soc.tail(mi_) = -(ec.g - sc);
            const VectorXd corr = fac.solve(rhs_soc);
            if (!corr.allFinite()) break;
            VectorXd ps(mi_);
            for (int i = 0; i < mi_; ++i) ps[i] = corr[n_ + me_ + i] / sigma_s[i];
            xc += corr.head(n_);
            sc += ps;
            bool inside = (sc.array() > (1.0 - tau) * it.s.array()).all();
            for (int k = 0; k < n_ && inside; ++k) {
              if (has_lo_[k] && xc[k] - lo_[k] <= (1.0 - tau) * dl[k]) inside = false;
              if (has_up_[k] && up_[k] - xc[k] <= (1.0 - tau) * du[k]) inside = false;
            }
            if (!inside) break;
            ec = evaluate(xc, false);
            if (!ec.finite) break;
            const double phic = barrier_merit(xc, sc, ec, nu);
            if (std::isfinite(phic) && phic <= phi0 + kArmijo * alpha * std::min(dphi, 0.0) + slop) {
              x_new = xc;
              s_new = sc;
              e_new = std::move(ec);
              accepted = true;
              break;
            }
            const double th_next = theta(ec, sc);
            if (th_next > 0.99 * th_c) break;
            th_c = th_next;
          }
          if (accepted) break;
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-16) break;
    }

    if (!accepted) {
      if (!restoration(it, e)) {
        const double viol = std::max(inf_norm(e.h), inf_norm(e.g - it.s));
        return finish(it, e, viol > tol ? SolveStatus::Infeasible : SolveStatus::NumericalFailure, iter);
      }
      log_.push_back({iter, mu_, e.f, std::max(inf_norm(e.h), inf_norm(e.g - it.s)), r0[0],
                      r0[2], 0.0, 0.0, -1.0});
      continue;
    }

    it.x = x_new;
    it.s = s_new;
    it.yh += alpha * dyh;
    it.yg += alpha * dyg;
    it.zl += a_dual * dzl;
    it.zu += a_dual * dzu;
    it.v += a_dual * dv;
    {
      const VectorXd dl2 = dist_lo(it.x), du2 = dist_up(it.x);
      for (int k = 0; k < n_; ++k) {
        if (has_lo_[k])
          it.zl[k] = std::clamp(it.zl[k], mu_ / (kSigmaBound * dl2[k]), kSigmaBound * mu_ / dl2[k]);
        if (has_up_[k])
          it.zu[k] = std::clamp(it.zu[k], mu_ / (kSigmaBound * du2[k]), kSigmaBound * mu_ / du2[k]);
      }
      for (int i = 0; i < mi_; ++i)
        it.v[i] = std::clamp(it.v[i], mu_ / (kSigmaBound * it.s[i]), kSigmaBound * mu_ / it.s[i]);
    }
    e = evaluate(it.x, true);
    if (!e.finite) return finish(it, e, SolveStatus::NumericalFailure, iter + 1);

    log_.push_back({iter, mu_, e.f, std::max(inf_norm(e.h), inf_norm(e.g - it.s)), r0[0], r0[2],
                    alpha, a_dual, delta_w});
    if (opt_.log) {
      const auto& r = log_.back();
      *opt_.log << std::scientific << std::setprecision(6) << "iter=" << r.iteration
                << " mu=" << r.mu << " obj=" << r.objective << " inf_pr=" << r.primal_infeasibility
                << " inf_du=" << r.dual_infeasibility << " compl=" << r.complementarity
                << " alpha_pr=" << r.step_primal << " alpha_du=" << r.step_dual
                << " reg=" << r.regularization << '\n';
    }
  }
}

Solution InteriorPoint::finish(const Iterate& it, const Eval& e, SolveStatus status, int iterations) {
  Solution sol;
  sol.status = status;
  sol.iterations = iterations;
  sol.x = it.x;
  sol.slacks = it.s;
  sol.eq_duals = it.yh;
  sol.ineq_duals = -it.yg;
  sol.bound_lower_duals = it.zl;
  sol.bound_upper_duals = it.zu;
  sol.log = std::move(log_);
  if (!e.finite || e.grad.size() != n_) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  const auto r = residuals(it, e, 0.0);
  sol.dual_residual = r[0];
  sol.primal_residual = r[1];
  sol.kkt_residual = std::max({r[0], r[1], r[2]});
  double comp = 0.0;
  for (int i = 0; i < mi_; ++i) comp = std::max(comp, std::abs(sol.ineq_duals[i] * e.g[i]));
  const VectorXd dl = dist_lo(it.x), du = dist_up(it.x);
  for (int k = 0; k < n_; ++k) {
    if (has_lo_[k]) comp = std::max(comp, std::abs(it.zl[k] * dl[k]));
    if (has_up_[k]) comp = std::max(comp, std::abs(it.zu[k] * du[k]));
  }
  sol.complementarity = comp;
  sol.objective = pb_.economic_value(it.x);
  sol.primal = pb_.rescale_solution(it.x);

  const double w = pb_.scaling().objective_scale;
  const auto& eqi = pb_.equality_info();
  const auto& ini = pb_.inequality_info();
  for (int i = 0; i < me_; ++i) sol.duals[eqi[i].label()] = it.yh[i] / (w * eqi[i].scale);
  for (int i = 0; i < mi_; ++i) sol.duals[ini[i].label()] = sol.ineq_duals[i] / (w * ini[i].scale);

  const double thr = opt_.binding_threshold;
  for (int i = 0; i < mi_; ++i)
    if (e.g[i] <= thr) sol.binding_set.push_back(ini[i].label());
  // rows that stand in for a collapsed pair of bounds
  static const std::map<std::string, std::vector<std::string>> pinned = {
      {"gamma_fixed", {"gamma_min", "gamma_max"}},
      {"boost_fixed", {"boost_min", "boost_max"}},
      {"supply_fixed", {"supply_min", "supply_max"}},
      {"demand_fixed", {"demand_min", "demand_max"}}};
  for (const auto& row : eqi) {
    auto p = pinned.find(row.kind);
    if (p == pinned.end()) continue;
    for (const auto& kind : p->second) sol.binding_set.push_back(kind + ":" + row.id);
  }
  for (const auto& label : pb_.implied_binding()) sol.binding_set.push_back(label);
  const auto& lay = pb_.layout();
  for (int k = 0; k < n_; ++k) {
    const auto& ent = lay[k];
    std::string base = ent.kind == VarKind::Flow     ? "flow"
                       : ent.kind == VarKind::Demand ? "demand"
                                                     : "gamma_edge";
    if (has_lo_[k] && dl[k] <= thr) sol.binding_set.push_back(base + "_min:" + ent.id);
    if (has_up_[k] && du[k] <= thr) sol.binding_set.push_back(base + "_max:" + ent.id);
  }
  std::sort(sol.binding_set.begin(), sol.binding_set.end());
  if (sol.status == SolveStatus::Optimal) sol.shadow_prices = extract_shadow_prices(sol, pb_);
  return sol;
}

}  // namespace

void SolverOptions::validate() const {
  if (!(kkt_tolerance > 0.0)) throw std::invalid_argument("kkt_tolerance must be positive");
  if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
  if (!(mu_init > 0.0)) throw std::invalid_argument("mu_init must be positive");
  if (!(mu_reduction > 0.0 && mu_reduction < 1.0))
    throw std::invalid_argument("mu_reduction must lie in (0,1)");
  if (!(tau_min > 0.0 && tau_min < 1.0)) throw std::invalid_argument("tau_min must lie in (0,1)");
  if (!(delta_init > 0.0)) throw std::invalid_argument("delta_init must be positive");
  if (!(binding_threshold > 0.0)) throw std::invalid_argument("binding_threshold must be positive");
  if (seed_count < 1) throw std::invalid_argument("seed_count must be at least 1");
  if (!(warm_mu_init > 0.0)) throw std::invalid_argument("warm_mu_init must be positive");
  if (!(bound_push > 0.0 && bound_push < 0.5)) throw std::invalid_argument("bound_push must lie in (0,0.5)");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

Eigen::VectorXd initialize(const AssembledProblem& problem, int seed) {
  const auto& net = problem.network();
  const auto& lay = problem.layout();
  const auto& sc = problem.scaling();
  const auto& gc = problem.gas();
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw = [&](double plain, double lo, double hi) {
    return seed == 0 ? plain : lo + unif(rng) * (hi - lo);
  };

  double sigma = 0.0;
  for (const auto& j : net.junctions())
    if (j.is_slack()) {
      sigma = *j.slack_pressure / sc.p0;
      break;
    }

  VectorXd x = VectorXd::Zero(lay.size());
  std::map<std::string, double> gamma0;
  for (const auto& j : net.junctions()) {
    const double g = problem.gamma_forced_zero(j.id)
                         ? 0.0
                         : draw(0.5 * (j.gamma_min + j.gamma_max), j.gamma_min, j.gamma_max);
    gamma0[j.id] = g;
    x[lay.index(VarKind::GammaNode, j.id)] = g;
    double p = std::max(sigma, 1.01 * j.p_min / sc.p0);
    p *= draw(1.0, 0.9, 1.1);
    x[lay.index(VarKind::Pressure, j.id)] = std::max(p, 1.01 * j.p_min / sc.p0);
  }
  for (const auto& p : net.pipes()) {
    x[lay.index(VarKind::GammaEdge, p.id)] = gamma0[p.from];
    x[lay.index(VarKind::Flow, p.id)] = draw(1e-3, 1e-3, 1e-2);
  }
  for (const auto& c : net.compressors()) {
    x[lay.index(VarKind::Flow, c.id)] = draw(1e-3, 1e-3, 1e-2);
    x[lay.index(VarKind::Alpha, c.id)] =
        std::min(c.alpha_max, draw(1.001, 1.0, c.alpha_max));
  }
  const double e0 = sc.phi0 * gc.r_ng;
  for (const auto& g : net.gnodes()) {
    if (g.is_supply()) {
      const VarKind kind = g.kind == GNodeKind::H2Supply ? VarKind::SupplyH2 : VarKind::SupplyNG;
      const double cap = g.s_max ? *g.s_max / sc.phi0 : 1.0;
      x[lay.index(kind, g.id)] = cap * draw(0.1, 0.05, 0.9);
    } else {
      const double ratio = (gc.r_ng + (gc.r_h2 - gc.r_ng) * gamma0[g.junction]) / gc.r_ng;
      const double energy = g.kind == GNodeKind::DemandFixed ? *g.g_fixed : *g.g_max * draw(0.1, 0.05, 0.9);
      x[lay.index(VarKind::Demand, g.id)] = energy / e0 / ratio;
    }
  }
  return x;
}

Solution solve_from(const AssembledProblem& problem, const SolverOptions& options,
                    const Eigen::VectorXd& x0, const Solution* warm) {
  options.validate();
  if (static_cast<std::size_t>(x0.size()) != problem.num_variables())
    throw std::invalid_argument("starting point has wrong dimension");
  InteriorPoint ip(problem, options);
  return ip.run(x0, warm);
}

Solution solve(const AssembledProblem& problem, const SolverOptions& options,
               const std::optional<Solution>& warm_start) {
  options.validate();
  std::optional<Solution> best;
  auto consider = [&](Solution s) {
    if (s.status != SolveStatus::Optimal) return;
    const double margin = 1e-9 * std::max(1.0, std::abs(s.objective));
    if (!best || s.objective > best->objective + margin) best = std::move(s);
  };
  // the warm candidate competes with the cold seeds and wins ties
  if (warm_start && static_cast<std::size_t>(warm_start->x.size()) == problem.num_variables()) {
    Solution s = solve_from(problem, options, warm_start->x, &*warm_start);
    s.seed = -1;
    consider(std::move(s));
  }
  Solution first;
  for (int seed = 0; seed < options.seed_count; ++seed) {
    Solution s = solve_from(problem, options, initialize(problem, seed));
    s.seed = seed;
    if (seed == 0) first = s;
    consider(std::move(s));
  }
  return best ? *best : first;
}

std::map<std::string, ShadowPrices> extract_shadow_prices(const Solution& solution,
                                                         const AssembledProblem& problem) {
  if (solution.status != SolveStatus::Optimal)
    throw std::logic_error("shadow prices requested for a non-optimal solution");
  const double denom = problem.scaling().objective_scale * problem.scaling().phi0;
  const auto& lay = problem.layout();
  std::map<std::string, ShadowPrices> out;
  for (const auto& j : problem.network().junctions()) {
    ShadowPrices p;
    p.ng = solution.eq_duals[problem.equality_row("ng_balance", j.id)] / denom;
    p.h2 = solution.eq_duals[problem.equality_row("h2_balance", j.id)] / denom;
    const double g = solution.x[lay.index(VarKind::GammaNode, j.id)];
    p.blend = g * p.h2 + (1.0 - g) * p.ng;
    out[j.id] = p;
  }
  return out;
}

}  // namespace h2blend
