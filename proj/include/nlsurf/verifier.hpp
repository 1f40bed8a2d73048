#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nlsurf/exact_engine.hpp"
#include "nlsurf/lattice.hpp"
#include "nlsurf/nishimori.hpp"
#include "nlsurf/quenched.hpp"

namespace nlsurf {

enum class CheckId { LE, MQ, G1, G2, IDSET_A, IDSET_B, IDSET_C };

std::string to_string(CheckId id);

struct VerifyOptions {
  AveragingMethod method = Quadrature{40};
  double tolerance = 1e-7;  // quadrature: absolute bound on |lhs - rhs|
  double n_sigma = 3.0;     // MC: bound in paired std errors
  double h = 1e-4;          // central-difference step in x
  ParallelOptions parallel;
  EngineOptions engine;
};

struct VerificationReport {
  CheckId check = CheckId::LE;
  std::string label;  // distinguishes the two IDSET_B equalities
  std::string instance;
  int dim = 0;
  int side = 0;
  Boundary boundary = Boundary::Free;
  std::vector<double> x;
  std::vector<std::size_t> bonds;
  Estimate lhs;
  Estimate rhs;
  double discrepancy = 0.0;  // lhs - rhs
  double std_error = 0.0;    // of the paired difference
  double tolerance = 0.0;    // bound actually applied to |discrepancy|
  bool sign_ok = true;       // G1: 0 <= rhs <= 2 x_b; G2: rhs >= 0
  bool passed = false;
};

/// The Gibbs-side quantities a check needs, requested in one disorder pass.
struct CheckSpec {
  CheckId check = CheckId::LE;
  std::size_t b = 0;
  std::size_t b2 = 0;
};

/// Evaluates every check from a single pass over the disorder.
std::vector<VerificationReport> run_checks(const LatticeSpec& lattice, const NishimoriParams& params,
                                           const std::vector<CheckSpec>& specs,
                                           const VerifyOptions& options, const std::string& instance = "");

VerificationReport verify_le(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             const VerifyOptions& options = {});
VerificationReport verify_mq(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             const VerifyOptions& options = {});
VerificationReport verify_g1(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             const VerifyOptions& options = {});
VerificationReport verify_g2(const LatticeSpec& lattice, const NishimoriParams& params, std::size_t b,
                             std::size_t b2, const VerifyOptions& options = {});
/// IDSET_A, IDSET_B (two reports), IDSET_C.
std::vector<VerificationReport> verify_idset(const LatticeSpec& lattice, const NishimoriParams& params,
                                             std::size_t b, std::size_t b2,
                                             const VerifyOptions& options = {});

/// [<S_b>] along a grid of x_b2 values, others fixed.
struct MonotoneReport {
  std::string instance;
  std::size_t b = 0;
  std::size_t b2 = 0;
  std::vector<double> grid;
  std::vector<Estimate> values;
  double tolerance = 0.0;
  bool passed = false;
};
MonotoneReport verify_g2_monotone(const LatticeSpec& lattice, const NishimoriParams& params,
                                  std::size_t b, std::size_t b2, const std::vector<double>& grid,
                                  const VerifyOptions& options = {}, const std::string& instance = "");

struct SuiteInstance {
  std::string name;
  LatticeSpec lattice;
};
/// Single bond, open 3-chain, 2x2 free box.
std::vector<SuiteInstance> standard_instances();

/// Rule and node count that keep the identities well below 1e-7 at this x:
/// Gauss-Hermite at small x, the Gaussian trapezoid rule beyond. Clipped to the grid cap.
Quadrature suite_quadrature(double x, std::size_t n_bonds);

struct SuiteOptions {
  std::vector<double> xs{0.3, 0.7, 1.2};
  bool quadrature = true;  // false: DisorderMC with `samples`, `seed`
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double identity_tolerance = 1e-7;    // LE, MQ, IDSET
  double derivative_tolerance = 1e-5;  // G1, G2
  std::vector<double> monotone_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  double monotone_tolerance = 1e-7;
  double h = 1e-4;
  ParallelOptions parallel;
};

struct SuiteReport {
  std::vector<VerificationReport> reports;
  std::vector<MonotoneReport> monotone;
  std::size_t failures() const;
  bool passed() const { return failures() == 0; }
};

SuiteReport run_standard_suite(const SuiteOptions& options = {});

}  // namespace nlsurf
