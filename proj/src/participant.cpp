#include "openeye/participant.hpp"

#include "openeye/rng.hpp"

namespace openeye::pupil {

FaceScores face_scores_from_pool(const ImagePool& pool) {
  FaceScores scores;
  for (const auto& [id, entry] : pool.entries()) {
    std::optional<double> left, right;
    for (const auto& a : entry.annotations) (a.side == Side::Left ? left : right) = a.biou;
    if (left || right) scores.emplace(id, combine_eyes(id, left, right));
  }
  return scores;
}

std::vector<study::Response> simulate_participant(const study::TrialSet& trials,
                                                  const FaceScores& scores, double tau,
                                                  study::Stage stage) {
  std::vector<study::Response> out;
  out.reserve(trials.image_ids.size());
  for (const auto& id : trials.image_ids) {
    const auto it = scores.find(id);
    if (it == scores.end()) throw Error(Errc::MissingAnnotation, "no face score for " + id);
    out.push_back({id, it->second.aggregate < tau ? Label::Fake : Label::Real, stage, 0});
  }
  return out;
}

std::vector<study::Response> random_participant(const study::TrialSet& trials, std::uint64_t seed,
                                                study::Stage stage) {
  CounterRng rng(seed);
  std::vector<study::Response> out;
  out.reserve(trials.image_ids.size());
  for (const auto& id : trials.image_ids)
    out.push_back({id, rng.below(2) == 0 ? Label::Real : Label::Fake, stage, 0});
  return out;
}

}  // namespace openeye::pupil
