#include "bitefuse/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "bitefuse/errors.hpp"
#include "bitefuse/stats.hpp"

namespace bitefuse {

namespace {

struct GtBox {
  std::string image_id;
  BoundingBox box;
  bool matched = false;
};

}  // namespace

MatchOutcome match_detections(const AnnotationSet& predictions,
                              const AnnotationSet& ground_truth, CariesClass cls,
                              double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("match_detections: iou_threshold must be in (0,1]");
  }

  std::vector<GtBox> gt;
  for (const Annotation& a : ground_truth.annotations) {
    if (a.label == cls) gt.push_back({a.image_id, a.box, false});
  }
  // deterministic tie resolution: ground truth in (image, box) order
  std::sort(gt.begin(), gt.end(), [](const GtBox& a, const GtBox& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.box < b.box;
  });
  std::unordered_map<std::string, std::vector<int>> gt_by_image;
  for (int i = 0; i < static_cast<int>(gt.size()); ++i) {
    gt_by_image[gt[i].image_id].push_back(i);
  }

  MatchOutcome out;
  out.gt_count = static_cast<int>(gt.size());
  for (const Annotation& a : predictions.annotations) {
    if (a.label == cls) {
      out.predictions.push_back({a.image_id, a.confidence, a.box, false, -1});
    }
  }
  std::sort(out.predictions.begin(), out.predictions.end(),
            [](const PredictionRecord& a, const PredictionRecord& b) {
              if (a.confidence != b.confidence) return a.confidence > b.confidence;
              if (a.image_id != b.image_id) return a.image_id < b.image_id;
              return a.box < b.box;
            });

  for (PredictionRecord& p : out.predictions) {
    const auto it = gt_by_image.find(p.image_id);
    int best = -1;
    double best_iou = 0.0;
    if (it != gt_by_image.end()) {
      for (int gi : it->second) {
        if (gt[gi].matched) continue;
        const double v = iou(p.box, gt[gi].box);
        if (v > best_iou) {  // strict: IoU ties keep the earliest gt
          best_iou = v;
          best = gi;
        }
      }
    }
    if (best >= 0 && best_iou >= iou_threshold) {
      gt[best].matched = true;
      p.is_tp = true;
      p.matched_gt = best;
      ++out.tp_count;
    } else {
      ++out.fp_count;
    }
  }
  out.fn_count = out.gt_count - out.tp_count;
  return out;
}

double average_precision(const MatchOutcome& outcome) {
  if (outcome.gt_count == 0) return 0.0;

  const double n_gt = outcome.gt_count;
  std::vector<double> recall;
  std::vector<double> precision;
  int tp = 0;
  int seen = 0;
  for (const PredictionRecord& p : outcome.predictions) {
    ++seen;
    if (p.is_tp) ++tp;
    recall.push_back(tp / n_gt);
    precision.push_back(static_cast<double>(tp) / seen);
  }

  // all-points interpolation: area under recall -> max precision at >= recall
  double ap = 0.0;
  double max_prec = 0.0;
  for (std::size_t i = recall.size(); i-- > 0;) {
    max_prec = std::max(max_prec, precision[i]);
    const double r_prev = i == 0 ? 0.0 : recall[i - 1];
    ap += (recall[i] - r_prev) * max_prec;
  }
  return ap;
}

OperatingPoint f1_fnr(const MatchOutcome& outcome, double confidence_threshold) {
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw ConfigError("f1_fnr: confidence_threshold must be in [0,1]");
  }
  OperatingPoint op;
  for (const PredictionRecord& p : outcome.predictions) {
    if (p.confidence < confidence_threshold) break;  // sorted descending
    if (p.is_tp) {
      ++op.tp;
    } else {
      ++op.fp;
    }
  }
  op.fn = outcome.gt_count - op.tp;

  op.precision = (op.tp + op.fp) > 0 ? static_cast<double>(op.tp) / (op.tp + op.fp) : 0.0;
  op.recall = (op.tp + op.fn) > 0 ? static_cast<double>(op.tp) / (op.tp + op.fn) : 0.0;
  const double pr = op.precision + op.recall;
  op.f1 = pr > 0.0 ? 2.0 * op.precision * op.recall / pr : 0.0;
  if (outcome.gt_count == 0) {
    op.fnr = 0.0;
    op.fnr_undefined = true;
  } else {
    op.fnr = static_cast<double>(op.fn) / (op.tp + op.fn);
  }
  return op;
}

EvaluationReport evaluate(const AnnotationSet& predictions, const AnnotationSet& ground_truth,
                          const std::vector<CariesClass>& classes, double iou_threshold,
                          double confidence_threshold) {
  if (classes.empty()) throw ConfigError("evaluate: empty class list");
  if (predictions.label_space != ground_truth.label_space) {
    throw ValidationError("evaluate: prediction and ground-truth label spaces differ");
  }
  std::unordered_set<std::string> gt_images;
  for (const ImageInfo& im : ground_truth.images) gt_images.insert(im.id);
  for (const Annotation& a : predictions.annotations) {
    if (!gt_images.count(a.image_id)) {
      throw ValidationError("evaluate: prediction on image \"" + a.image_id +
                            "\" absent from ground truth");
    }
  }

  EvaluationReport report;
  report.iou_threshold = iou_threshold;
  report.confidence_threshold = confidence_threshold;
  report.classes = classes;

  double sum_ap = 0.0, sum_f1 = 0.0, sum_fnr = 0.0;
  int included = 0;
  for (CariesClass cls : classes) {
    const MatchOutcome outcome =
        match_detections(predictions, ground_truth, cls, iou_threshold);
    const OperatingPoint op = f1_fnr(outcome, confidence_threshold);
    ClassMetrics m;
    m.ap = average_precision(outcome);
    m.f1 = op.f1;
    m.fnr = op.fnr;
    m.tp = op.tp;
    m.fp = op.fp;
    m.fn = op.fn;
    m.gt_count = outcome.gt_count;
    m.excluded = outcome.gt_count == 0;
    if (!m.excluded) {
      sum_ap += m.ap;
      sum_f1 += m.f1;
      sum_fnr += m.fnr;
      ++included;
    }
    report.per_class.push_back(m);
  }
  if (included > 0) {
    report.map = sum_ap / included;
    report.mf1 = sum_f1 / included;
    report.mfnr = sum_fnr / included;
  }
  return report;
}

FoldSummary aggregate_folds(const std::vector<EvaluationReport>& reports) {
  if (reports.size() < 2) {
    throw ValidationError("aggregate_folds: need at least 2 reports");
  }
  for (const EvaluationReport& r : reports) {
    if (r.classes != reports.front().classes) {
      throw ValidationError("aggregate_folds: heterogeneous class lists");
    }
  }

  FoldSummary summary;
  summary.n_folds = static_cast<int>(reports.size());
  summary.classes = reports.front().classes;

  auto cell = [&](auto&& extract) {
    std::vector<double> xs;
    xs.reserve(reports.size());
    for (const EvaluationReport& r : reports) xs.push_back(extract(r));
    return AggregateCell{mean(xs), sample_std(xs)};
  };

  for (std::size_t c = 0; c < summary.classes.size(); ++c) {
    FoldSummary::PerClass pc;
    pc.ap = cell([c](const EvaluationReport& r) { return r.per_class[c].ap; });
    pc.f1 = cell([c](const EvaluationReport& r) { return r.per_class[c].f1; });
    pc.fnr = cell([c](const EvaluationReport& r) { return r.per_class[c].fnr; });
    summary.per_class.push_back(pc);
  }
  summary.map = cell([](const EvaluationReport& r) { return r.map; });
  summary.mf1 = cell([](const EvaluationReport& r) { return r.mf1; });
  summary.mfnr = cell([](const EvaluationReport& r) { return r.mfnr; });
  return summary;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json doc;
  doc["config"]["iou_threshold"] = report.iou_threshold;
  doc["config"]["confidence_threshold"] = report.confidence_threshold;
  auto names = nlohmann::ordered_json::array();
  for (CariesClass c : report.classes) names.push_back(to_string(c));
  doc["config"]["classes"] = names;
  doc["classes"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    const ClassMetrics& m = report.per_class[i];
    doc["classes"][std::string(to_string(report.classes[i]))] = {
        {"ap", m.ap},         {"f1", m.f1},
        {"fnr", m.fnr},       {"tp", m.tp},
        {"fp", m.fp},         {"fn", m.fn},
        {"gt_count", m.gt_count}, {"excluded", m.excluded}};
  }
  doc["macro"] = {{"map", report.map}, {"mf1", report.mf1}, {"mfnr", report.mfnr}};
  return doc.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text, const std::string& context) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  EvaluationReport report;
  try {
    report.iou_threshold = doc.at("config").at("iou_threshold").get<double>();
    report.confidence_threshold = doc.at("config").at("confidence_threshold").get<double>();
    for (const auto& name : doc.at("config").at("classes")) {
      report.classes.push_back(caries_class_from_string(name.get<std::string>()));
    }
    for (CariesClass c : report.classes) {
      const auto& jm = doc.at("classes").at(std::string(to_string(c)));
      ClassMetrics m;
      m.ap = jm.at("ap").get<double>();
      m.f1 = jm.at("f1").get<double>();
      m.fnr = jm.at("fnr").get<double>();
      m.tp = jm.at("tp").get<int>();
      m.fp = jm.at("fp").get<int>();
      m.fn = jm.at("fn").get<int>();
      m.gt_count = jm.at("gt_count").get<int>();
      m.excluded = jm.at("excluded").get<bool>();
      report.per_class.push_back(m);
    }
    report.map = doc.at("macro").at("map").get<double>();
    report.mf1 = doc.at("macro").at("mf1").get<double>();
    report.mfnr = doc.at("macro").at("mfnr").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  return report;
}

}  // namespace bitefuse
