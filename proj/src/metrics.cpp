#include "openeye/metrics.hpp"

namespace openeye::study {

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.confusion = cm;
  const double tp = cm.tp, fp = cm.fp, tn = cm.tn, fn = cm.fn;
  const double total = tp + fp + tn + fn;
  r.accuracy = total > 0 ? (tp + tn) / total : 0.0;

  if (cm.tp + cm.fp == 0)
    r.degenerate_flags.insert(DegenerateFlag::PrecisionUndefined);
  else
    r.precision = tp / (tp + fp);

  if (cm.tp + cm.fn == 0)
    r.degenerate_flags.insert(DegenerateFlag::RecallUndefined);
  else
    r.recall = tp / (tp + fn);

  // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn) whenever P+R > 0, which is exact in
  // one division.
  if (r.precision + r.recall == 0.0)
    r.degenerate_flags.insert(DegenerateFlag::FUndefined);
  else
    r.f_score = 2.0 * tp / (2.0 * tp + fp + fn);
  return r;
}

}  // namespace openeye::study
