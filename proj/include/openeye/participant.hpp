#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "openeye/image_pool.hpp"
#include "openeye/pupil.hpp"
#include "openeye/study.hpp"

namespace openeye::pupil {

using FaceScores = std::map<std::string, FaceScore>;

/// Face scores from the annotations cached in the pool. Images without any
/// scored eye are left out.
FaceScores face_scores_from_pool(const ImagePool& pool);

/// A participant trained on the pupil cue: calls a face Fake iff its aggregate
/// boundary-IoU score is below `tau`. One response per trial image, in
/// trial-set order. Throws MissingAnnotation for unscored images.
std::vector<study::Response> simulate_participant(const study::TrialSet& trials,
                                                  const FaceScores& scores, double tau,
                                                  study::Stage stage = study::Stage::Stage3);

/// Untrained baseline: a fair coin per image, reproducible from `seed`.
std::vector<study::Response> random_participant(const study::TrialSet& trials, std::uint64_t seed,
                                                study::Stage stage = study::Stage::Stage1);

}  // namespace openeye::pupil
