#include "openeye/simulate.hpp"

#include <string>

#include "openeye/rng.hpp"

namespace openeye::service {

namespace {

void answer(StudyService& service, const std::string& id, const study::StudySession& session,
            study::Stage stage, const std::vector<study::Response>& responses) {
  std::map<std::string, Label> verdicts;
  for (const auto& r : responses) verdicts[r.image_id] = r.verdict;
  for (const auto& image : study::presentation_order(session, stage))
    service.submit_response(id, image, verdicts.at(image), 0);
  service.complete_stage(id);
}

}  // namespace

SimulationResult run_simulation(StudyService& service, const pupil::FaceScores& scores,
                                const SimulationOptions& options) {
  CounterRng seeds(options.seed);
  SimulationResult result;
  std::vector<study::StudySession> done;
  for (std::size_t i = 0; i < options.sessions; ++i) {
    const std::uint64_t session_seed = seeds();
    const std::uint64_t coin_seed = seeds();
    const auto created = service.create_session("sim-" + std::to_string(i), session_seed);
    const std::string id = created.at("session_id").get<std::string>();

    auto session = *service.snapshot(id);
    answer(service, id, session, study::Stage::Stage1,
           pupil::random_participant(session.trial_set, coin_seed, study::Stage::Stage1));
    for (const auto& course : service.courses().course_ids()) service.complete_course(id, course);

    session = *service.snapshot(id);
    answer(service, id, session, study::Stage::Stage3,
           pupil::simulate_participant(session.trial_set, scores, options.tau, study::Stage::Stage3));

    session = *service.snapshot(id);
    result.sessions.push_back({id, study::compare_stages(session, service.labels())});
    done.push_back(std::move(session));
  }
  result.aggregate = aggregate(done, service.labels());
  return result;
}

}  // namespace openeye::service
