#pragma once

// Named end-to-end experiments, each reporting PASS or FAIL with the
// measured values.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rumorlab/engine.hpp"

namespace rumorlab {

struct AcceptanceOptions {
  std::uint64_t seed = 20251019;
  int jobs = 1;
};

struct AcceptanceResult {
  int number = 0;
  std::string id;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;

  /// "PASS [n] id: detail (t s)"
  std::string line() const;
};

/// In criterion order.
const std::vector<std::string>& acceptance_ids();

class AcceptanceRunner {
 public:
  explicit AcceptanceRunner(AcceptanceOptions options = {});

  /// Throws Error{InvalidArgument} for an unknown id.
  AcceptanceResult run(const std::string& id);
  std::vector<AcceptanceResult> run_all();

  /// 100 replicas of the torus reference configuration at side L, cached.
  const std::vector<Trajectory>& torus_replicas(int side);

 private:
  AcceptanceResult oracle_c4();
  AcceptanceResult flln_torus();
  AcceptanceResult variance_scaling();
  AcceptanceResult quadrature_order();
  AcceptanceResult classic_mt();
  AcceptanceResult gaussian_fluct();
  AcceptanceResult fclt_limit();
  AcceptanceResult noise_cov();
  AcceptanceResult blueprints();
  AcceptanceResult growth_margin();

  AcceptanceOptions options_;
  std::map<int, std::vector<Trajectory>> torus_;
};

}  // namespace rumorlab
