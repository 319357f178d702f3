#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "rssloc/estimators.hpp"

namespace rssloc {

// Convex relaxation of the uplink ML problem
//
//   minimize    sum_i (h_i * lambda_i - alpha)^2
//   subject to  h_i = r_i'r_i - 2 r_i'x + z
//               [I x; x' z] >= 0
//
// with lambda_i = 10^(P_i / 5 beta) and alpha = 10^(p0 / 5 beta). The identity
// block makes the PSD constraint equivalent to z >= x'x, so after substituting h
// the program has four unknowns (x, z, alpha) and one convex inequality, solved
// here by a log-barrier Newton method.
//
// With three receivers the residuals are three linear forms in four unknowns, so
// the optimum is a segment and the barrier converges to its analytic centre, a
// point with z > |x|^2 that is not a position estimate at all. In that case the
// solver walks the flat direction to the two ends of the segment, where
// z = |x|^2 (a rank-one, exact solution), and returns one of them.

struct SdpOptions {
  double t0 = 1.0;
  double mu = 10.0;             ///< barrier parameter growth per outer iteration
  double gap_tolerance = 1e-8;  ///< stop once 1/t falls below this
  int max_newton_steps = 200;   ///< total over all outer iterations
  /// Prefer the rank-one end of a flat optimum that lies in this box; otherwise
  /// the end with the smaller uplink ML cost.
  std::optional<Box> region_of_interest;
  bool recover_rank_one = true;
};

struct SdpSolution {
  Position x;
  double z = 0.0;      ///< m^2, z >= |x|^2
  double alpha = 0.0;
  std::vector<double> h;  ///< m^2, h_i = r_i'r_i - 2 r_i'x + z
  double cost = 0.0;
  int newton_steps = 0;
  bool rank_one_recovered = false;
};

class SdpError : public std::runtime_error {
 public:
  SdpError(const std::string& what, SdpSolution best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const SdpSolution& best_iterate() const { return best_; }

 private:
  SdpSolution best_;
};

/// Objective of the relaxation at (x, z, alpha), in the caller's units.
double sdp_objective(UlMeasurements measurements, double beta, const Position& x, double z,
                     double alpha);

/// Throws std::invalid_argument with no measurements, SdpError on non-convergence.
SdpSolution solve_sdp_init(UlMeasurements measurements, double beta, const SdpOptions& options = {});

}  // namespace rssloc
