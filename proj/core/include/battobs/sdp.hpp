#pragma once

#include <string>

#include "battobs/lmi.hpp"

namespace battobs {

enum class SolveStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(SolveStatus s);

struct SdpSettings {
  double gap_tol_rel = 1e-7;  // relative duality-gap target
  double eps_feas = 1e-9;     // strict margin required on -F at an optimum
  double eps_pd = 1e-9;       // strict margin required on X
  double p_floor = 1e-9;      // lower bound applied to p
  int max_iter = 200;         // Newton-step budget per phase
  double mu = 20.0;           // barrier stage multiplier

  enum class Method {
    Auto,        // structured when Eq.(9) metadata is present and the problem
                 // is large; generic otherwise
    Generic,     // barrier path-following on the full (p,X,Y) variables
    Structured,  // Lyapunov-dual solve with Riccati-certified polish
  };
  Method method = Method::Auto;
  bool verbose = false;
};

struct SdpCertificates {
  double min_eig_neg_f = 0.0;  // lambda_min(-F(p*,X*,Y*))
  double min_eig_x = 0.0;      // lambda_min(X*)
  double duality_gap = 0.0;    // absolute gap estimate at termination
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector p;
  Matrix x;
  Matrix y;
  double cost = 0.0;
  SdpCertificates cert;
  int iterations = 0;
  std::string message;
};

// Solves the LMI-constrained precision-minimization problem. Optimal status
// implies a strictly feasible returned point (certificates positive) with the
// duality gap within tolerance; Infeasible means no strictly feasible point
// exists (decided by a feasibility phase or a validated dual ray).
SdpSolution solve(const LmiProblem& problem, const SdpSettings& settings = {});

}  // namespace battobs
