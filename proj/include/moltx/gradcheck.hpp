#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "moltx/molgraph.hpp"
#include "moltx/params.hpp"
#include "moltx/rng.hpp"

namespace moltx {

// Central-difference verification of every exported loss on seeded tiny
// instances. Losses wired through the gradient reversal layer are checked
// per parameter group against the group's effective objective (the
// discriminators' own loss for Theta/Psi, the adversarial composite for the
// encoder), which is what one backward pass of the training graph realizes.

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Sweeps the named parameters coordinate-wise; `eval` must recompute the
// loss from the current parameter values. Analytic gradients are looked up
// per parameter name.
double fd_max_rel_err(
    ParamSet& params, const std::vector<std::string>& names,
    const std::function<double()>& eval,
    const std::map<std::string, std::vector<double>>& analytic,
    double h = 1e-5);

struct GradCheckOptions {
  std::uint64_t seed = 20240501;
  double tol = 1e-4;
  double h = 1e-5;
  // Mutation hook: removes the gradient reversal in the composite suites so
  // the sign contract visibly fails.
  bool inject_grl_bug = false;
};

std::vector<GradCheckResult> run_gradcheck_suites(
    const GradCheckOptions& opts = {});

// Random connected graph over the supported element subset; shared by the
// diagnostic suites and the property tests.
MolecularGraph random_test_graph(Rng& rng, int min_atoms, int max_atoms);

}  // namespace moltx
