#include "rssloc/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace rssloc {

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Internal problem is translated to the receiver centroid, scaled by the receiver
// spread, and lambda/alpha are normalised by the mean received power so that
// lambda_i ~ 1. The objective then scales by a constant factor only.
struct ScaledProblem {
  Position centroid;
  double scale = 1.0;  // meters per internal unit
  double power_offset = 0.0;  // mean(P_i) / (5 beta)
  Eigen::MatrixXd rows;  // N x 4: residual_i = rows_i . theta - rhs_i
  Eigen::VectorXd rhs;
};

ScaledProblem scale_problem(UlMeasurements m, double beta) {
  ScaledProblem p;
  const auto n = static_cast<double>(m.size());
  for (const auto& meas : m) {
    p.centroid.x += meas.receiver.x / n;
    p.centroid.y += meas.receiver.y / n;
    p.power_offset += meas.rss_dbm / (5.0 * beta) / n;
  }
  double spread = 0.0;
  for (const auto& meas : m) spread = std::max(spread, distance(meas.receiver, p.centroid));
  p.scale = spread > 1.0 ? spread : 1.0;

  p.rows.resize(static_cast<Eigen::Index>(m.size()), 4);
  p.rhs.resize(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double rx = (m[i].receiver.x - p.centroid.x) / p.scale;
    const double ry = (m[i].receiver.y - p.centroid.y) / p.scale;
    const double lambda = std::pow(10.0, m[i].rss_dbm / (5.0 * beta) - p.power_offset);
    const auto row = static_cast<Eigen::Index>(i);
    p.rows(row, 0) = -2.0 * lambda * rx;
    p.rows(row, 1) = -2.0 * lambda * ry;
    p.rows(row, 2) = lambda;
    p.rows(row, 3) = -1.0;
    p.rhs(row) = -lambda * (rx * rx + ry * ry);
  }
  return p;
}

double slack(const Vec4& theta) { return theta(2) - theta(0) * theta(0) - theta(1) * theta(1); }

double objective(const ScaledProblem& p, const Vec4& theta) {
  return (p.rows * theta - p.rhs).squaredNorm();
}

double barrier_value(const ScaledProblem& p, const Vec4& theta, double t) {
  const double g = slack(theta);
  if (!(g > 0.0)) return std::numeric_limits<double>::infinity();
  return t * objective(p, theta) - std::log(g);
}

SdpSolution unscale(const ScaledProblem& p, const Vec4& theta, UlMeasurements m, double beta,
                    int steps) {
  SdpSolution s;
  s.x = {p.centroid.x + p.scale * theta(0), p.centroid.y + p.scale * theta(1)};
  s.z = s.x.x * s.x.x + s.x.y * s.x.y + p.scale * p.scale * slack(theta);
  // alpha_internal = kappa * alpha with kappa = 10^(-power_offset) / scale^2
  s.alpha = theta(3) * p.scale * p.scale * std::pow(10.0, p.power_offset);
  s.h.reserve(m.size());
  for (const auto& meas : m) {
    const auto& r = meas.receiver;
    s.h.push_back(r.x * r.x + r.y * r.y - 2.0 * (r.x * s.x.x + r.y * s.x.y) + s.z);
  }
  s.cost = sdp_objective(m, beta, s.x, s.z, s.alpha);
  s.newton_steps = steps;
  return s;
}

// Unconstrained least-squares minimiser of the residuals, with the flat direction
// when the residual map has rank 3 (three receivers, or degenerate geometry).
struct LeastSquares {
  Vec4 theta;
  int rank = 0;
  Vec4 null_direction = Vec4::Zero();
};

LeastSquares least_squares(const ScaledProblem& p) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.rows, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-9);
  LeastSquares ls;
  ls.theta = svd.solve(p.rhs);
  ls.rank = static_cast<int>(svd.rank());
  if (ls.rank == 3) ls.null_direction = svd.matrixV().col(3);
  return ls;
}

// Along theta + tau n the slack is s0 + b tau - a tau^2. Returns the two roots,
// or nothing when the line never reaches the feasible set.
std::optional<std::pair<Vec4, Vec4>> chord_ends(const Vec4& theta, const Vec4& n) {
  const double a = n(0) * n(0) + n(1) * n(1);
  const double s0 = slack(theta);
  const double b = n(2) - 2.0 * (theta(0) * n(0) + theta(1) * n(1));
  const auto end = [&](double tau) {
    Vec4 e = theta + tau * n;
    e(2) = e(0) * e(0) + e(1) * e(1);
    return e;
  };
  if (a < 1e-12) {
    // x is pinned (target equidistant from all receivers) and the optimal set is
    // a ray in (z, alpha); its only rank-one point is where the ray starts.
    if (std::abs(b) < 1e-12) return std::nullopt;
    const Vec4 e = end(-s0 / b);
    return std::pair{e, e};
  }
  const double disc = b * b + 4.0 * a * s0;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  return std::pair{end((b + root) / (2.0 * a)), end((b - root) / (2.0 * a))};
}

// Newton on t f - log(z - |x|^2) with f divided by its value at the start, so
// that t0 and the gap tolerance do not depend on the units of the powers.
Vec4 barrier_solve(ScaledProblem p, Vec4 theta, const SdpOptions& options, UlMeasurements m,
                   double beta, int& steps) {
  const double f0 = std::sqrt(objective(p, theta));
  if (f0 > 0.0) {
    p.rows /= f0;
    p.rhs /= f0;
  }
  const Mat4 gram = 2.0 * p.rows.transpose() * p.rows;

  constexpr double kCenteringTol = 1e-10;
  constexpr double kPrecisionFloor = 1e-12;
  constexpr double kArmijo = 0.25;
  constexpr double kMinStep = 1e-8;
  double t = options.t0;
  for (;;) {
    for (;;) {
      const double g = slack(theta);
      Vec4 dg;
      dg << -2.0 * theta(0), -2.0 * theta(1), 1.0, 0.0;
      const Vec4 grad = 2.0 * t * (p.rows.transpose() * (p.rows * theta - p.rhs)) - dg / g;
      Mat4 hess = t * gram + dg * dg.transpose() / (g * g);
      hess(0, 0) += 2.0 / g;
      hess(1, 1) += 2.0 / g;

      const Vec4 step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      if (!std::isfinite(decrement))
        throw SdpError("SDP Newton step is not finite", unscale(p, theta, m, beta, steps));
      // Below the rounding level of the barrier value the Armijo test is noise.
      const double current = barrier_value(p, theta, t);
      const double floor = kPrecisionFloor * std::max(1.0, std::abs(current));
      if (decrement / 2.0 <= std::max(kCenteringTol, floor)) break;

      if (++steps > options.max_newton_steps)
        throw SdpError(fmt::format("SDP did not converge in {} Newton steps", options.max_newton_steps),
                       unscale(p, theta, m, beta, steps - 1));

      double s = 1.0;
      while (s >= kMinStep) {
        const Vec4 trial = theta + s * step;
        if (slack(trial) > 0.0 && barrier_value(p, trial, t) <= current - kArmijo * s * decrement) break;
        s *= 0.5;
      }
      const Vec4 next = theta + s * step;
      // No representable progress left at this precision.
      if (s < kMinStep || next == theta) break;
      theta = next;
    }
    // One inequality constraint, so the duality gap on the central path is 1/t.
    if (1.0 / t < options.gap_tolerance) break;
    t *= options.mu;
  }
  return theta;
}

}  // namespace

double sdp_objective(UlMeasurements measurements, double beta, const Position& x, double z,
                     double alpha) {
  double cost = 0.0;
  for (const auto& meas : measurements) {
    const auto& r = meas.receiver;
    const double h = r.x * r.x + r.y * r.y - 2.0 * (r.x * x.x + r.y * x.y) + z;
    const double lambda = std::pow(10.0, meas.rss_dbm / (5.0 * beta));
    const double e = h * lambda - alpha;
    cost += e * e;
  }
  return cost;
}

SdpSolution solve_sdp_init(UlMeasurements measurements, double beta, const SdpOptions& options) {
  if (measurements.empty()) throw std::invalid_argument("SDP initialiser needs measurements");
  if (!(beta > 0.0)) throw std::invalid_argument("path-loss exponent must be positive");

  const ScaledProblem p = scale_problem(measurements, beta);
  const auto finish = [&](const Vec4& theta, int steps) { return unscale(p, theta, measurements, beta, steps); };
  const auto pick = [&](const std::pair<Vec4, Vec4>& ends, int steps) {
    const SdpSolution a = finish(ends.first, steps);
    const SdpSolution b = finish(ends.second, steps);
    const auto inside = [&](const SdpSolution& c) {
      return options.region_of_interest && options.region_of_interest->contains(c.x);
    };
    const auto ml_cost = [&](const SdpSolution& c) {
      return mle_cost({c.x, closed_form_p0(c.x, measurements, beta)}, measurements, beta);
    };
    SdpSolution chosen;
    if (inside(a) != inside(b))
      chosen = inside(a) ? a : b;
    else
      chosen = ml_cost(a) <= ml_cost(b) ? a : b;
    chosen.rank_one_recovered = true;
    return chosen;
  };

  // When the unconstrained minimiser already satisfies z >= |x|^2 it is the
  // optimum, and least squares gives it to full precision.
  const LeastSquares ls = least_squares(p);
  constexpr double kSlackTolerance = 1e-9;
  if (ls.rank == 4 && slack(ls.theta) >= -kSlackTolerance) {
    Vec4 theta = ls.theta;
    theta(2) = std::max(theta(2), theta(0) * theta(0) + theta(1) * theta(1));
    return finish(theta, 0);
  }
  if (ls.rank == 3) {
    if (auto ends = chord_ends(ls.theta, ls.null_direction)) {
      if (options.recover_rank_one) return pick(*ends, 0);
      // The barrier's limit: the analytic centre of the optimal chord. A ray has
      // no centre, so its end is returned instead.
      const Vec4 mid = (ends->first + ends->second) / 2.0;
      return finish(mid, 0);
    }
  }

  // Constraint active: start at the receiver centroid with 1 m^2 of slack and
  // alpha from the closed-form reference power there.
  const double p0 = closed_form_p0(p.centroid, measurements, beta);
  Vec4 theta;
  theta << 0.0, 0.0, 1.0 / (p.scale * p.scale),
      std::pow(10.0, p0 / (5.0 * beta) - p.power_offset) / (p.scale * p.scale);
  int steps = 0;
  theta = barrier_solve(p, theta, options, measurements, beta, steps);
  if (options.recover_rank_one && ls.rank == 3) {
    if (auto ends = chord_ends(theta, ls.null_direction)) return pick(*ends, steps);
  }
  return finish(theta, steps);
}

}  // namespace rssloc
