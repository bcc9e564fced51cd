#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fracvar/functionals.hpp"

namespace fracvar {

struct SolverSettings {
  double tol = 1e-6;
  int max_iter = 2000;
  std::uint64_t seed = 1;
  /// Random normalized samples on top of the suite for C4 and C5.
  int embedding_samples = 500;
  /// Random points on the sphere ||v||_{W_0} = r.
  int sphere_samples = 200;
  /// Points on the discretized mountain-pass path, endpoints included.
  int path_points = 33;
  /// Points of the log grid for F(r).
  int profile_points = 101;
};

struct SolveReport {
  explicit SolveReport(GridFunction u) : solution(std::move(u)) {}

  GridFunction solution;
  int iterations = 0;
  std::vector<double> energy_trace;
  std::vector<double> residual_trace;
  std::vector<double> norm_w_trace;
  std::vector<double> norm_q_trace;
  bool converged = false;
  double wallclock = 0.0;
  /// Sphere-constrained solves: lambda plus the constraint multiplier, i.e.
  /// the lambda for which the solution is a free critical point.
  double lambda_effective = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;

  double residual() const { return residual_trace.empty() ? 0.0 : residual_trace.back(); }
  double energy() const { return energy_trace.empty() ? 0.0 : energy_trace.back(); }
};

// ----------------------------------------------------------- closed forms

/// lambda_1 = (Lambda^-2 q (p-1)) / (C5 p (q-1)) * ((q-p) / (p (q-1)) / (C4^{1/p} |f|))^{(q-p)/(p-1)}.
double lambda1_threshold(double p, double q, double Lambda, double C4, double C5, double f_norm);
/// r0 = q (p-1) / (p (q-1)) * Lambda^-2 / (lambda C5).
double r0_maximizer(double p, double q, double Lambda, double lambda, double C5);
/// The stationary point of F: r0^{1/(q-p)}. Agrees with r0_maximizer only
/// when q - p = 1.
double F_maximizer(double p, double q, double Lambda, double lambda, double C5);
/// F(r) = Lambda^-2 r^{p-1} / p - lambda C5 r^{q-1} / q - C4^{1/p} |f|.
double F_value(double r, double p, double q, double Lambda, double lambda, double C4, double C5, double f_norm);
/// F(r) > max(F(0.99 r), F(1.01 r)).
bool F_peaks_at(double r, double p, double q, double Lambda, double lambda, double C4, double C5, double f_norm);

// ------------------------------------------------------------- estimates

struct EmbeddingConstants {
  /// sup ||w||_p^p over the sampled W_0-normalized w (a lower bound).
  double C4 = 0.0;
  /// sup ||w||_q^q over the same samples.
  double C5 = 0.0;
  int samples = 0;
};

EmbeddingConstants estimate_embedding_constants(const NonlocalQuadrature& quad, double p, double q,
                                                int samples = 500, std::uint64_t seed = 1);
EmbeddingConstants estimate_embedding_constants(const Mesh1D& mesh, const KernelSpec& kernel, double p,
                                                double q, int samples = 500, std::uint64_t seed = 1,
                                                const QuadratureRule& rule = {});

struct RayleighEstimate {
  /// min ||u||_{W_0} / ||u||_q found: an upper bound to the infimum.
  double value;
  /// Minimizer with ||u||_q = 1.
  GridFunction minimizer;
  bool converged;
};

RayleighEstimate rayleigh_inf_estimate(const Mesh1D& mesh, const KernelSpec& kernel, double p, double q,
                                       int samples = 200, const SolverSettings& settings = {},
                                       const QuadratureRule& rule = {});

// --------------------------------------------------------- mountain pass

struct MountainPassGeometry {
  explicit MountainPassGeometry(GridFunction u) : u1(std::move(u)) {}

  double C4 = 0.0;
  double C5 = 0.0;
  double f_norm = 0.0;
  double lambda1 = 0.0;
  /// Closed-form r0.
  double r0 = 0.0;
  /// Stationary point of F; the sphere radius used for the geometry.
  double r0_stationary = 0.0;
  bool r0_is_maximizer = false;
  std::vector<double> profile_r;
  std::vector<double> profile_F;
  GridFunction u1;
  double energy_u1 = 0.0;
  /// min of I over the sampled sphere ||v||_{W_0} = r0_stationary.
  double sphere_min_estimate = 0.0;
  /// Same at the closed-form radius r0.
  double sphere_min_closed_form = 0.0;
  std::vector<std::string> warnings;
};

/// Lemma-style geometry for the model; throws PreconditionError when lambda
/// is at least 10% above lambda_1 or Lambda is outside [1, (q/p)^{1/4}).
MountainPassGeometry mountain_pass_geometry(const EnergyModel& m, const SolverSettings& settings = {});

struct MountainPassResult {
  SolveReport report;
  MountainPassGeometry geometry;
};

/// Minimax over rays: maximize I along the path 0 -> k v, descend the
/// direction v with the Sobolev gradient, repeat until the dual-norm
/// residual is below tol.
MountainPassResult mountain_pass_solve(const EnergyModel& m, const SolverSettings& settings = {});

// ---------------------------------------------------------------- sphere

/// Minimizes I on {||u||_q = 1} by projected Sobolev-gradient steps. The
/// start is `initial` or the lowest-energy suite member.
SolveReport sphere_constrained_solve(const EnergyModel& m, const SolverSettings& settings = {},
                                     const std::optional<GridFunction>& initial = {});

struct HomotopyReport {
  explicit HomotopyReport(SolveReport r) : report(std::move(r)) {}

  /// One trace row per stage n = 0..n_steps.
  SolveReport report;
  std::vector<double> source_scale;      // 2^-n
  std::vector<double> cauchy;            // ||u_{n+1} - u_n||_{W_0}
  std::vector<double> stage_lambda;      // lambda + multiplier
  std::vector<int> stage_iterations;
  std::vector<double> bound_chain_gap;   // Lambda^-2 ||u_n||^p - lambda_n - int f_n u_n (<= 0 expected)
  double residual_p1 = 0.0;              // at lambda_effective, source removed
  double residual_p1_model = 0.0;        // at the model lambda
  double residual_p2_last = 0.0;         // last stage source, lambda_effective
  double rayleigh_estimate = 0.0;
  double lambda_effective = 0.0;
};

/// Solves P2 on the sphere for f_n = f_0 2^-n, n = 0..n_steps, warm-started.
HomotopyReport homotopy_to_p1(const EnergyModel& m, int n_steps = 12, const SolverSettings& settings = {},
                              double stage_tol = 1e-10);

}  // namespace fracvar
