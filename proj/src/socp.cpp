#include "polytraj/socp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace polytraj::socp {

namespace {

// Cone layout helper: leading orthant block plus dense per-cone scaling data.
struct SocScaling {
  int start = 0;
  int dim = 0;
  Eigen::MatrixXd W;      // NT scaling block (symmetric)
  Eigen::MatrixXd Winv;   // W^-1 (symmetric)
  Eigen::MatrixXd W2;     // W^2
  Eigen::MatrixXd W2inv;  // W^-2
};

struct Iterate {
  Eigen::VectorXd x, y, z, s;
  double tau = 1.0, kap = 1.0;
};

struct Stats {
  double gap = 0.0, mu = 0.0, pcost = 0.0, dcost = 0.0;
  std::optional<double> relgap, pinfres, dinfres;
  double pres = 0.0, dres = 0.0, kapovert = 0.0;
};

class InteriorPointSolver {
 public:
  InteriorPointSolver(const Problem &prob, const Settings &settings)
      : set_(settings),
        n_(prob.num_vars()),
        p_(prob.num_eq()),
        m_(prob.num_cone()),
        l_(prob.lp_dim),
        c_(prob.c),
        A_(prob.A),
        b_(prob.b),
        G_(prob.G),
        h_(prob.h) {
    if (m_ <= 0) throw std::invalid_argument("socp: at least one cone row is required");
    int soc_total = 0;
    int start = l_;
    for (int q : prob.soc_dims) {
      if (q < 2) throw std::invalid_argument("socp: SOC dimension must be >= 2");
      SocScaling sc;
      sc.start = start;
      sc.dim = q;
      socs_.push_back(sc);
      start += q;
      soc_total += q;
    }
    if (l_ + soc_total != m_) throw std::invalid_argument("socp: cone dims do not match G rows");
    if (p_ > 0 && A_.cols() != n_) throw std::invalid_argument("socp: A column mismatch");
    if (G_.cols() != n_) throw std::invalid_argument("socp: G column mismatch");
    cone_degree_ = l_ + static_cast<int>(socs_.size());
    equilibrate();
  }

  Result run() {
    Result res;

    setIdentityScaling();
    if (!factorKKT()) return res;

    // Initial primal/dual guesses from two KKT solves (ECOS-style).
    Eigen::VectorXd x1(n_), y1(p_), z1(m_), x2(n_), y2(p_), z2(m_);
    solveKKT(Eigen::VectorXd::Zero(n_), b_, h_, x1, y1, z1);
    it_.x = x1;
    bringToCone(-z1, it_.s);
    solveKKT(-c_, Eigen::VectorXd::Zero(p_), Eigen::VectorXd::Zero(m_), x2, y2, z2);
    it_.y = y2;
    bringToCone(z2, it_.z);
    it_.tau = 1.0;
    it_.kap = 1.0;

    resx0_ = std::max(1.0, c_.norm());
    resy0_ = std::max(1.0, b_.norm());
    resz0_ = std::max(1.0, h_.norm());

    Iterate best = it_;
    Stats best_stats;
    double pres_prev = std::numeric_limits<double>::max();
    Status code = Status::NumericalFailure;
    bool have_best = false;

    int iter = 0;
    for (iter = 0; iter <= set_.max_iters; ++iter) {
      computeResiduals();
      computeStats();

#ifdef POLYTRAJ_SOCP_TRACE
      std::printf("it %2d pcost % .6e dcost % .6e gap %.2e pres %.2e dres %.2e tau %.2e kap %.2e\n",
                  iter, stats_.pcost, stats_.dcost, stats_.gap, stats_.pres, stats_.dres, it_.tau,
                  it_.kap);
#endif

      // Backtrack when the direction was unreliable.
      if (iter > 0 && (stats_.pres > set_.safeguard * pres_prev || stats_.gap < 0.0)) {
        if (have_best) {
          it_ = best;
          stats_ = best_stats;
        }
        code = checkExit(true).value_or(Status::NumericalFailure);
        break;
      }
      pres_prev = stats_.pres;

      if (auto exit = checkExit(false)) {
        code = *exit;
        break;
      }
      if (iter == set_.max_iters) {
        if (have_best && betterThan(best_stats, stats_)) {
          it_ = best;
          stats_ = best_stats;
        }
        code = checkExit(true).value_or(Status::MaxIterations);
        break;
      }
      if (!std::isfinite(stats_.pcost)) {
        if (have_best) {
          it_ = best;
          stats_ = best_stats;
          code = checkExit(true).value_or(Status::NumericalFailure);
        }
        break;
      }

      if (!have_best || betterThan(stats_, best_stats)) {
        best = it_;
        best_stats = stats_;
        have_best = true;
      }

      if (!updateScalings()) {
        it_ = best;
        stats_ = best_stats;
        code = checkExit(true).value_or(Status::NumericalFailure);
        break;
      }
      if (!factorKKT()) {
        it_ = best;
        stats_ = best_stats;
        code = checkExit(true).value_or(Status::NumericalFailure);
        break;
      }

      // Solve for the tau-column direction, reused by both predictor and corrector.
      solveKKT(-c_, b_, h_, x1, y1, z1);
      const double dtau_denom = it_.kap / it_.tau - c_.dot(x1) - dot_b(y1) - h_.dot(z1);

      // Affine (predictor) direction.
      solveKKT(rx_, -ry_, it_.s - rz_, x2, y2, z2);
      const double dtauaff = (rt_ - it_.kap + c_.dot(x2) + dot_b(y2) + h_.dot(z2)) / dtau_denom;
      Eigen::VectorXd dzaff = z2 + dtauaff * z1;
      Eigen::VectorXd W_dzaff(m_);
      scale(dzaff, W_dzaff);
      Eigen::VectorXd dsaff_by_W = -W_dzaff - lambda_;
      const double dkapaff = -it_.kap - it_.kap / it_.tau * dtauaff;

      const double step_aff =
          lineSearch(dsaff_by_W, W_dzaff, it_.tau, dtauaff, it_.kap, dkapaff);
      const double sigma =
          std::clamp(std::pow(1.0 - step_aff, 3), set_.sigma_min, set_.sigma_max);

      // Combined (centering + corrector) direction.
      Eigen::VectorXd ds1(m_), ds2(m_);
      conicProduct(lambda_, lambda_, ds1);
      conicProduct(dsaff_by_W, W_dzaff, ds2);
      const double sigmamu = sigma * stats_.mu;
      ds1 += ds2;
      ds1.head(l_).array() -= sigmamu;
      for (const SocScaling &sc : socs_) ds1(sc.start) -= sigmamu;

      Eigen::VectorXd lambda_div(m_), Wlambda_div(m_);
      conicDivision(lambda_, ds1, lambda_div);
      scale(lambda_div, Wlambda_div);

      const double one_minus_sigma = 1.0 - sigma;
      solveKKT(one_minus_sigma * rx_, -one_minus_sigma * ry_,
               -one_minus_sigma * rz_ + Wlambda_div, x2, y2, z2);

      const double bkap = it_.kap * it_.tau + dkapaff * dtauaff - sigmamu;
      const double dtau = (one_minus_sigma * rt_ - bkap / it_.tau + c_.dot(x2) + dot_b(y2) +
                           h_.dot(z2)) /
                          dtau_denom;
      x2 += dtau * x1;
      y2 += dtau * y1;
      z2 += dtau * z1;

      Eigen::VectorXd W_dz(m_);
      scale(z2, W_dz);
      Eigen::VectorXd ds_by_W = -(lambda_div + W_dz);
      const double dkap = -(bkap + it_.kap * dtau) / it_.tau;

      const double step =
          set_.step_scale * lineSearch(ds_by_W, W_dz, it_.tau, dtau, it_.kap, dkap);
      Eigen::VectorXd ds(m_);
      scale(ds_by_W, ds);

      it_.x += step * x2;
      it_.y += step * y2;
      it_.z += step * z2;
      it_.s += step * ds;
      it_.kap += step * dkap;
      it_.tau += step * dtau;
    }

    res.status = code;
    res.iterations = iter;
    res.pres = stats_.pres;
    res.dres = stats_.dres;
    res.gap = stats_.gap;

    // Undo homogenization and equilibration.
    const double tau = it_.tau != 0.0 ? it_.tau : 1.0;
    res.x = it_.x.cwiseQuotient(x_equil_ * tau);
    res.y = p_ > 0 ? Eigen::VectorXd(it_.y.cwiseQuotient(A_equil_ * tau)) : Eigen::VectorXd();
    res.z = it_.z.cwiseQuotient(G_equil_ * tau);
    res.s = it_.s.cwiseProduct(G_equil_) / tau;
    res.primal_objective = c_.dot(it_.x) / tau;
    return res;
  }

 private:
  double dot_b(const Eigen::VectorXd &y) const { return p_ > 0 ? b_.dot(y) : 0.0; }

  // --- Ruiz-style equilibration (cone rows share a common factor) ---------
  void equilibrate() {
    x_equil_ = Eigen::VectorXd::Ones(n_);
    A_equil_ = Eigen::VectorXd::Ones(p_);
    G_equil_ = Eigen::VectorXd::Ones(m_);

    for (int it = 0; it < set_.equil_iters; ++it) {
      Eigen::VectorXd x_tmp = Eigen::VectorXd::Zero(n_);
      Eigen::VectorXd a_tmp = Eigen::VectorXd::Zero(p_);
      Eigen::VectorXd g_tmp = Eigen::VectorXd::Zero(m_);

      for (int j = 0; j < n_; ++j) {
        if (p_ > 0) x_tmp(j) = A_.col(j).cwiseAbs().maxCoeff();
        x_tmp(j) = std::max(x_tmp(j), G_.col(j).cwiseAbs().maxCoeff());
      }
      for (int i = 0; i < p_; ++i) a_tmp(i) = A_.row(i).cwiseAbs().maxCoeff();
      for (int i = 0; i < m_; ++i) g_tmp(i) = G_.row(i).cwiseAbs().maxCoeff();
      for (const SocScaling &sc : socs_) {
        const double total = g_tmp.segment(sc.start, sc.dim).sum();
        g_tmp.segment(sc.start, sc.dim).setConstant(total);
      }

      auto sqrt_op = [](double a) { return std::abs(a) < 1e-6 ? 1.0 : std::sqrt(a); };
      x_tmp = x_tmp.unaryExpr(sqrt_op);
      a_tmp = a_tmp.unaryExpr(sqrt_op);
      g_tmp = g_tmp.unaryExpr(sqrt_op);

      if (p_ > 0) A_ = a_tmp.cwiseInverse().asDiagonal() * A_ * x_tmp.cwiseInverse().asDiagonal();
      G_ = g_tmp.cwiseInverse().asDiagonal() * G_ * x_tmp.cwiseInverse().asDiagonal();

      x_equil_ = x_equil_.cwiseProduct(x_tmp);
      A_equil_ = A_equil_.cwiseProduct(a_tmp);
      G_equil_ = G_equil_.cwiseProduct(g_tmp);
    }

    c_ = c_.cwiseQuotient(x_equil_);
    if (p_ > 0) b_ = b_.cwiseQuotient(A_equil_);
    h_ = h_.cwiseQuotient(G_equil_);
  }

  // --- cone utilities ------------------------------------------------------
  void bringToCone(const Eigen::VectorXd &r, Eigen::VectorXd &out) {
    double alpha = -0.99;
    for (int i = 0; i < l_; ++i) {
      if (r(i) <= 0.0 && -r(i) > alpha) alpha = -r(i);
    }
    for (const SocScaling &sc : socs_) {
      const double res = r(sc.start) - r.segment(sc.start + 1, sc.dim - 1).norm();
      if (res <= 0.0 && -res > alpha) alpha = -res;
    }
    alpha += 1.0;
    out = r;
    out.head(l_).array() += alpha;
    for (const SocScaling &sc : socs_) out(sc.start) += alpha;
  }

  // w = u o v (Jordan product)
  void conicProduct(const Eigen::VectorXd &u, const Eigen::VectorXd &v, Eigen::VectorXd &w) const {
    w.head(l_) = u.head(l_).cwiseProduct(v.head(l_));
    for (const SocScaling &sc : socs_) {
      const int k = sc.start;
      const double u0 = u(k), v0 = v(k);
      w(k) = u.segment(k, sc.dim).dot(v.segment(k, sc.dim));
      w.segment(k + 1, sc.dim - 1) =
          u0 * v.segment(k + 1, sc.dim - 1) + v0 * u.segment(k + 1, sc.dim - 1);
    }
  }

  // v = u \ w (inverse Jordan product)
  void conicDivision(const Eigen::VectorXd &u, const Eigen::VectorXd &w, Eigen::VectorXd &v) const {
    v.head(l_) = w.head(l_).cwiseQuotient(u.head(l_));
    for (const SocScaling &sc : socs_) {
      const int k = sc.start;
      const double u0 = u(k), w0 = w(k);
      const double rho = u0 * u0 - u.segment(k + 1, sc.dim - 1).squaredNorm();
      const double zeta = u.segment(k + 1, sc.dim - 1).dot(w.segment(k + 1, sc.dim - 1));
      const double factor = (zeta / u0 - w0) / rho;
      v(k) = (u0 * w0 - zeta) / rho;
      v.segment(k + 1, sc.dim - 1) =
          factor * u.segment(k + 1, sc.dim - 1) + w.segment(k + 1, sc.dim - 1) / u0;
    }
  }

  // lambda = W z
  void scale(const Eigen::VectorXd &z, Eigen::VectorXd &out) const {
    out.head(l_) = w_lp_.cwiseProduct(z.head(l_));
    for (const SocScaling &sc : socs_) {
      out.segment(sc.start, sc.dim).noalias() = sc.W * z.segment(sc.start, sc.dim);
    }
  }

  void setIdentityScaling() {
    w2_lp_ = Eigen::VectorXd::Ones(l_);
    w_lp_ = Eigen::VectorXd::Ones(l_);
    w2inv_lp_ = Eigen::VectorXd::Ones(l_);
    for (SocScaling &sc : socs_) {
      sc.W = Eigen::MatrixXd::Identity(sc.dim, sc.dim);
      sc.Winv = sc.W;
      sc.W2 = sc.W;
      sc.W2inv = sc.W;
    }
    lambda_ = Eigen::VectorXd::Ones(m_);
  }

  bool updateScalings() {
    w2_lp_ = it_.s.head(l_).cwiseQuotient(it_.z.head(l_));
    if (l_ > 0 && !(w2_lp_.array() > 0.0).all()) return false;
    w_lp_ = w2_lp_.cwiseSqrt();
    w2inv_lp_ = w2_lp_.cwiseInverse();

    for (SocScaling &sc : socs_) {
      const int k = sc.start;
      const int q = sc.dim;
      const double sres =
          it_.s(k) * it_.s(k) - it_.s.segment(k + 1, q - 1).squaredNorm();
      const double zres =
          it_.z(k) * it_.z(k) - it_.z.segment(k + 1, q - 1).squaredNorm();
      if (sres <= 0.0 || zres <= 0.0) return false;
      const double snorm = std::sqrt(sres);
      const double znorm = std::sqrt(zres);
      const Eigen::VectorXd sbar = it_.s.segment(k, q) / snorm;
      const Eigen::VectorXd zbar = it_.z.segment(k, q) / znorm;
      const double eta = std::sqrt(snorm / znorm);

      double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
      const double a = (0.5 / gamma) * (sbar(0) + zbar(0));
      const Eigen::VectorXd qv =
          (0.5 / gamma) * (sbar.tail(q - 1) - zbar.tail(q - 1));

      sc.W.resize(q, q);
      sc.W(0, 0) = a;
      sc.W.block(0, 1, 1, q - 1) = qv.transpose();
      sc.W.block(1, 0, q - 1, 1) = qv;
      sc.W.block(1, 1, q - 1, q - 1) =
          Eigen::MatrixXd::Identity(q - 1, q - 1) + qv * qv.transpose() / (1.0 + a);
      sc.W *= eta;

      sc.Winv.resize(q, q);
      sc.Winv(0, 0) = a;
      sc.Winv.block(0, 1, 1, q - 1) = -qv.transpose();
      sc.Winv.block(1, 0, q - 1, 1) = -qv;
      sc.Winv.block(1, 1, q - 1, q - 1) =
          Eigen::MatrixXd::Identity(q - 1, q - 1) + qv * qv.transpose() / (1.0 + a);
      sc.Winv /= eta;

      sc.W2.noalias() = sc.W * sc.W;
      sc.W2inv.noalias() = sc.Winv * sc.Winv;
    }
    scale(it_.z, lambda_);
    return true;
  }

  // --- KKT factorization -----------------------------------------------
  //
  // Orthant rows with a moderate scaling are eliminated into the dense
  // normal-equations block M = Gb' Wb^-2 Gb. Rows whose scaling has blown up
  // (active constraints near convergence) would square their conditioning
  // there, so they stay explicit, together with the SOC blocks, in a small
  // augmented quasi-definite system factored by LDLT:
  //
  //   [ M+dI   A'    Ga'  ] [dx ]   [bx + Gb' Wb^-2 bzb]
  //   [ A     -dI    0    ] [dy ] = [by]
  //   [ Ga     0   -Wa^2-dI] [dza]  [bza]
  bool factorKKT() {
    constexpr double kKeepCutoff = 1e6;
    kept_.clear();
    benign_.clear();
    for (int i = 0; i < l_; ++i) {
      if (w2inv_lp_(i) > kKeepCutoff) {
        kept_.push_back(i);
      } else {
        benign_.push_back(i);
      }
    }

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_, n_);
    if (!benign_.empty()) {
      Eigen::MatrixXd scaled(static_cast<int>(benign_.size()), n_);
      for (int r = 0; r < scaled.rows(); ++r) {
        scaled.row(r) = std::sqrt(w2inv_lp_(benign_[static_cast<size_t>(r)])) *
                        G_.row(benign_[static_cast<size_t>(r)]);
      }
      M.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
      M = M.selfadjointView<Eigen::Lower>();
    }

    int soc_rows = 0;
    for (const SocScaling &sc : socs_) soc_rows += sc.dim;
    const int ka = static_cast<int>(kept_.size());
    const int dim = n_ + p_ + ka + soc_rows;

    K_ = Eigen::MatrixXd::Zero(dim, dim);
    K_.topLeftCorner(n_, n_) = M;
    K_.topLeftCorner(n_, n_).diagonal().array() += set_.static_reg;
    if (p_ > 0) {
      K_.block(n_, 0, p_, n_) = A_;
      K_.block(0, n_, n_, p_) = A_.transpose();
      K_.block(n_, n_, p_, p_).diagonal().array() -= set_.static_reg;
    }
    int row = n_ + p_;
    for (int i : kept_) {
      K_.block(row, 0, 1, n_) = G_.row(i);
      K_.block(0, row, n_, 1) = G_.row(i).transpose();
      K_(row, row) = -1.0 / w2inv_lp_(i) - set_.static_reg;
      ++row;
    }
    for (const SocScaling &sc : socs_) {
      K_.block(row, 0, sc.dim, n_) = G_.middleRows(sc.start, sc.dim);
      K_.block(0, row, n_, sc.dim) = G_.middleRows(sc.start, sc.dim).transpose();
      K_.block(row, row, sc.dim, sc.dim) = -sc.W2;
      K_.block(row, row, sc.dim, sc.dim).diagonal().array() -= set_.static_reg;
      row += sc.dim;
    }

    ldlt_.compute(K_);
    return ldlt_.info() == Eigen::Success;
  }

  void applyW2inv(const Eigen::VectorXd &v, Eigen::VectorXd &out) const {
    out.head(l_) = w2inv_lp_.cwiseProduct(v.head(l_));
    for (const SocScaling &sc : socs_) {
      out.segment(sc.start, sc.dim).noalias() = sc.W2inv * v.segment(sc.start, sc.dim);
    }
  }

  void applyW2(const Eigen::VectorXd &v, Eigen::VectorXd &out) const {
    out.head(l_) = w2_lp_.cwiseProduct(v.head(l_));
    for (const SocScaling &sc : socs_) {
      out.segment(sc.start, sc.dim).noalias() = sc.W2 * v.segment(sc.start, sc.dim);
    }
  }

  // Solve [0 A' G'; A 0 0; G 0 -W^2] [dx dy dz] = [bx by bz] with refinement.
  void solveKKT(const Eigen::VectorXd &bx, const Eigen::VectorXd &by, const Eigen::VectorXd &bz,
                Eigen::VectorXd &dx, Eigen::VectorXd &dy, Eigen::VectorXd &dz) {
    dx.setZero(n_);
    dy.setZero(p_);
    dz.setZero(m_);

    Eigen::VectorXd ex = bx, ey = by, ez = bz;
    Eigen::VectorXd tmp_m(m_);
    const double threshold =
        set_.refine_acc *
        (1.0 + std::max({bx.lpNorm<Eigen::Infinity>(),
                         p_ > 0 ? by.lpNorm<Eigen::Infinity>() : 0.0,
                         bz.lpNorm<Eigen::Infinity>()}));

    const int ka = static_cast<int>(kept_.size());
    int soc_rows = 0;
    for (const SocScaling &sc : socs_) soc_rows += sc.dim;
    Eigen::VectorXd rhs(n_ + p_ + ka + soc_rows);

    double err_prev = std::numeric_limits<double>::max();
    for (int round = 0; round <= set_.refine_iters; ++round) {
      // Correction for the current residual (ex, ey, ez).
      rhs.head(n_) = ex;
      for (int i : benign_) rhs.head(n_) += w2inv_lp_(i) * ez(i) * G_.row(i).transpose();
      if (p_ > 0) rhs.segment(n_, p_) = ey;
      int row = n_ + p_;
      for (int i : kept_) rhs(row++) = ez(i);
      for (const SocScaling &sc : socs_) {
        rhs.segment(row, sc.dim) = ez.segment(sc.start, sc.dim);
        row += sc.dim;
      }

      const Eigen::VectorXd sol = ldlt_.solve(rhs);
      const auto &cx = sol.head(n_);
      dx += cx;
      if (p_ > 0) dy += sol.segment(n_, p_);
      // Recover the eliminated multipliers and collect the explicit ones.
      Eigen::VectorXd cz(m_);
      for (int i : benign_) cz(i) = w2inv_lp_(i) * (G_.row(i).dot(cx) - ez(i));
      row = n_ + p_;
      for (int i : kept_) cz(i) = sol(row++);
      for (const SocScaling &sc : socs_) {
        cz.segment(sc.start, sc.dim) = sol.segment(row, sc.dim);
        row += sc.dim;
      }
      dz += cz;

      if (round == set_.refine_iters) break;

      // True residual of the unregularized system.
      ex = bx - G_.transpose() * dz;
      if (p_ > 0) ex -= A_.transpose() * dy;
      ey = p_ > 0 ? Eigen::VectorXd(by - A_ * dx) : by;
      applyW2(dz, tmp_m);
      ez = bz - (G_ * dx - tmp_m);

      const double err = std::max({ex.lpNorm<Eigen::Infinity>(),
                                   p_ > 0 ? ey.lpNorm<Eigen::Infinity>() : 0.0,
                                   ez.lpNorm<Eigen::Infinity>()});
      if (err < threshold || err >= err_prev) break;
      err_prev = err;
    }
  }

  // --- residuals, statistics, exit tests -----------------------------------
  void computeResiduals() {
    rx_ = -(G_.transpose() * it_.z);
    if (p_ > 0) rx_ -= A_.transpose() * it_.y;
    hresx_ = rx_.norm();
    rx_ -= it_.tau * c_;

    if (p_ > 0) {
      ry_ = A_ * it_.x;
      hresy_ = ry_.norm();
      ry_ -= it_.tau * b_;
    } else {
      ry_.resize(0);
      hresy_ = 0.0;
    }

    rz_ = it_.s + G_ * it_.x;
    hresz_ = rz_.norm();
    rz_ -= it_.tau * h_;

    cx_ = c_.dot(it_.x);
    by_ = dot_b(it_.y);
    hz_ = h_.dot(it_.z);
    rt_ = it_.kap + cx_ + by_ + hz_;
  }

  void computeStats() {
    stats_ = Stats();
    stats_.gap = it_.s.dot(it_.z);
    stats_.mu = (stats_.gap + it_.kap * it_.tau) / (cone_degree_ + 1);
    stats_.kapovert = it_.kap / it_.tau;
    stats_.pcost = cx_ / it_.tau;
    stats_.dcost = -(hz_ + by_) / it_.tau;

    if (stats_.pcost < 0.0) {
      stats_.relgap = stats_.gap / (-stats_.pcost);
    } else if (stats_.dcost > 0.0) {
      stats_.relgap = stats_.gap / stats_.dcost;
    }

    const double nx = it_.x.norm();
    const double ny = p_ > 0 ? it_.y.norm() : 0.0;
    const double nz = it_.z.norm();
    const double ns = it_.s.norm();

    const double nry = p_ > 0 ? ry_.norm() / std::max(resy0_ + nx, 1.0) : 0.0;
    const double nrz = rz_.norm() / std::max(resz0_ + nx + ns, 1.0);
    stats_.pres = std::max(nry, nrz) / it_.tau;
    stats_.dres = rx_.norm() / std::max(resx0_ + ny + nz, 1.0) / it_.tau;

    if ((hz_ + by_) / std::max(ny + nz, 1.0) < -set_.reltol) {
      stats_.pinfres = hresx_ / std::max(ny + nz, 1.0);
    }
    if (cx_ / std::max(nx, 1.0) < -set_.reltol) {
      stats_.dinfres = std::max(hresy_ / std::max(nx, 1.0), hresz_ / std::max(nx + ns, 1.0));
    }
  }

  std::optional<Status> checkExit(bool reduced) const {
    const double feastol = reduced ? set_.feastol_inacc : set_.feastol;
    const double abstol = reduced ? set_.abstol_inacc : set_.abstol;
    const double reltol = reduced ? set_.reltol_inacc : set_.reltol;

    if ((-stats_.pcost > 0.0 || stats_.dcost >= -abstol) && stats_.pres < feastol &&
        stats_.dres < feastol &&
        (stats_.gap < abstol || (stats_.relgap && *stats_.relgap < reltol))) {
      return reduced ? Status::OptimalInaccurate : Status::Optimal;
    }
    if (stats_.dinfres && *stats_.dinfres < feastol && it_.tau < it_.kap) {
      return Status::DualInfeasible;
    }
    if (stats_.pinfres && *stats_.pinfres < feastol &&
        (it_.tau < it_.kap || (it_.tau < feastol && it_.kap < feastol))) {
      return Status::PrimalInfeasible;
    }
    return std::nullopt;
  }

  static bool betterThan(const Stats &a, const Stats &b) {
    if (a.pinfres && a.kapovert > 1.0) {
      return a.gap > 0.0 && b.gap > 0.0 && a.gap < b.gap && *a.pinfres > 0.0 &&
             *a.pinfres < b.pres && a.mu > 0.0 && a.mu < b.mu;
    }
    return a.gap > 0.0 && b.gap > 0.0 && a.gap < b.gap && a.pres > 0.0 && a.pres < b.pres &&
           a.dres > 0.0 && a.dres < b.dres && a.kapovert > 0.0 && a.kapovert < b.kapovert &&
           a.mu > 0.0 && a.mu < b.mu;
  }

  // Maximum step keeping (s, z, tau, kappa) in the cone.
  double lineSearch(const Eigen::VectorXd &ds, const Eigen::VectorXd &dz, double tau, double dtau,
                    double kap, double dkap) const {
    double alpha;
    if (l_ > 0) {
      const double rhomin = ds.head(l_).cwiseQuotient(lambda_.head(l_)).minCoeff();
      const double sigmin = dz.head(l_).cwiseQuotient(lambda_.head(l_)).minCoeff();
      constexpr double eps = 1e-13;
      if (-sigmin > -rhomin) {
        alpha = sigmin < 0.0 ? 1.0 / (-sigmin) : 1.0 / eps;
      } else {
        alpha = rhomin < 0.0 ? 1.0 / (-rhomin) : 1.0 / eps;
      }
    } else {
      alpha = 10.0;
    }

    const double tau_bound = -tau / dtau;
    const double kap_bound = -kap / dkap;
    if (tau_bound > 0.0 && tau_bound < alpha) alpha = tau_bound;
    if (kap_bound > 0.0 && kap_bound < alpha) alpha = kap_bound;

    for (const SocScaling &sc : socs_) {
      const int k = sc.start;
      const int q = sc.dim;
      const double lknorm2 =
          lambda_(k) * lambda_(k) - lambda_.segment(k + 1, q - 1).squaredNorm();
      if (lknorm2 <= 0.0) continue;
      const double lknorm = std::sqrt(lknorm2);
      const Eigen::VectorXd lkbar = lambda_.segment(k, q) / lknorm;
      const double lknorminv = 1.0 / lknorm;

      const double lk_ds =
          lkbar(0) * ds(k) - lkbar.tail(q - 1).dot(ds.segment(k + 1, q - 1));
      const double lk_dz =
          lkbar(0) * dz(k) - lkbar.tail(q - 1).dot(dz.segment(k + 1, q - 1));

      double factor = (lk_ds + ds(k)) / (lkbar(0) + 1.0);
      const double rho0 = lknorminv * lk_ds;
      const double rhonorm =
          (lknorminv * (ds.segment(k + 1, q - 1) - factor * lkbar.tail(q - 1))).norm() - rho0;

      factor = (lk_dz + dz(k)) / (lkbar(0) + 1.0);
      const double sig0 = lknorminv * lk_dz;
      const double signorm =
          (lknorminv * (dz.segment(k + 1, q - 1) - factor * lkbar.tail(q - 1))).norm() - sig0;

      const double conic_step = std::max({0.0, rhonorm, signorm});
      if (conic_step != 0.0) alpha = std::min(alpha, 1.0 / conic_step);
    }

    return std::clamp(alpha, set_.step_min, set_.step_max);
  }

  // problem data (equilibrated)
  Settings set_;
  int n_, p_, m_, l_;
  Eigen::VectorXd c_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd G_;
  Eigen::VectorXd h_;
  std::vector<SocScaling> socs_;
  int cone_degree_ = 0;

  Eigen::VectorXd x_equil_, A_equil_, G_equil_;

  // scalings
  Eigen::VectorXd w2_lp_, w_lp_, w2inv_lp_, lambda_;

  // KKT factorization workspace
  Eigen::MatrixXd K_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  std::vector<int> kept_, benign_;

  // iterate and residuals
  Iterate it_;
  Stats stats_;
  Eigen::VectorXd rx_, ry_, rz_;
  double hresx_ = 0.0, hresy_ = 0.0, hresz_ = 0.0;
  double cx_ = 0.0, by_ = 0.0, hz_ = 0.0, rt_ = 0.0;
  double resx0_ = 1.0, resy0_ = 1.0, resz0_ = 1.0;
};

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::OptimalInaccurate:
      return "optimal_inaccurate";
    case Status::PrimalInfeasible:
      return "primal_infeasible";
    case Status::DualInfeasible:
      return "dual_infeasible";
    case Status::MaxIterations:
      return "max_iterations";
    case Status::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

Result solve(const Problem &prob, const Settings &settings) {
  if (!prob.c.allFinite() || !prob.G.allFinite() || !prob.h.allFinite() ||
      (prob.A.size() > 0 && !prob.A.allFinite()) || (prob.b.size() > 0 && !prob.b.allFinite())) {
    throw std::invalid_argument("socp: non-finite problem data");
  }
  InteriorPointSolver solver(prob, settings);
  return solver.run();
}

}  // namespace polytraj::socp
