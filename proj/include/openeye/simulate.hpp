#pragma once

#include <cstdint>
#include <vector>

#include "openeye/aggregate.hpp"
#include "openeye/participant.hpp"
#include "openeye/service.hpp"

namespace openeye::service {

struct SimulationOptions {
  std::size_t sessions = 10;
  double tau = 0.0;
  std::uint64_t seed = 1;
};

struct SimulatedSession {
  std::string session_id;
  study::ComparisonReport report;
};

struct SimulationResult {
  std::vector<SimulatedSession> sessions;
  AggregateReport aggregate;
};

/// Drives complete sessions through the service: Stage 1 answered by the
/// fair-coin baseline, every course completed in order, Stage 3 answered by
/// the pupil-cue participant. Session seeds derive from options.seed, so a
/// run is reproducible.
SimulationResult run_simulation(StudyService& service, const pupil::FaceScores& scores,
                                const SimulationOptions& options);

}  // namespace openeye::service
