#include "lcp/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "lcp/errors.h"

namespace lcp {

void ConfusionMatrix::add(Maneuver truth, Maneuver predicted) {
  ++counts[static_cast<std::size_t>(class_index(truth))]
          [static_cast<std::size_t>(class_index(predicted))];
}

std::size_t ConfusionMatrix::row_total(int row) const {
  std::size_t total = 0;
  for (std::size_t c : counts[static_cast<std::size_t>(row)]) total += c;
  return total;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t total = 0;
  for (int r = 0; r < kNumClasses; ++r) total += row_total(r);
  return total;
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < kNumClasses; ++r) hits += counts[r][r];
  return hits;
}

double ConfusionMatrix::percent(int row, int col) const {
  const std::size_t total = row_total(row);
  if (total == 0) return 0.0;
  return 100.0 *
         static_cast<double>(
             counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]) /
         static_cast<double>(total);
}

double ConfusionMatrix::overall() const {
  const std::size_t n = total();
  return n == 0 ? 0.0
                : 100.0 * static_cast<double>(correct()) / static_cast<double>(n);
}

ConfusionMatrix confusion(std::span<const Maneuver> truth,
                          std::span<const Maneuver> predicted) {
  if (truth.empty()) throw ArgumentError("confusion: empty test set");
  if (truth.size() != predicted.size()) {
    throw ArgumentError("confusion: " + std::to_string(truth.size()) +
                        " labels but " + std::to_string(predicted.size()) +
                        " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

ConfusionMatrix confusion(const Model& model,
                          std::span<const Segment> segments) {
  if (segments.empty()) throw ArgumentError("confusion: empty test set");
  std::vector<Maneuver> truth;
  truth.reserve(segments.size());
  for (const Segment& s : segments) truth.push_back(s.label);
  const std::vector<Maneuver> predicted = classify_all(model, segments);
  return confusion(truth, predicted);
}

std::string format_fixed(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.6f", value);
  return buffer;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true,kind,pred_left,pred_follow,pred_right,row_total\n";
  for (int r = 0; r < kNumClasses; ++r) {
    out << to_string(maneuver_from_index(r)) << ",count";
    for (int c = 0; c < kNumClasses; ++c) {
      out << "," << cm.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    out << "," << cm.row_total(r) << "\n";
  }
  for (int r = 0; r < kNumClasses; ++r) {
    out << to_string(maneuver_from_index(r)) << ",percent";
    double sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
      out << "," << format_fixed(cm.percent(r, c));
      sum += cm.percent(r, c);
    }
    out << "," << format_fixed(sum) << "\n";
  }
}

std::vector<PredictionPoint> prediction_points(
    int vehicle_id, std::span<const FramePrediction> timeline,
    int consecutive) {
  if (consecutive < 1) throw ArgumentError("prediction_points: run must be >= 1");
  std::vector<PredictionPoint> points;
  int run = 0;
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    const FramePrediction& p = timeline[i];
    const bool continues = i > 0 && timeline[i - 1].frame + 1 == p.frame &&
                           timeline[i - 1].label == p.label;
    run = continues ? run + 1 : 1;
    if (p.label == Maneuver::kFollow || run != consecutive) continue;
    points.push_back(PredictionPoint{
        vehicle_id, p.frame,
        p.label == Maneuver::kLeft ? Direction::kLeft : Direction::kRight});
  }
  return points;
}

std::vector<PredictionPoint> prediction_points(
    std::span<const Segment> segments, std::span<const Maneuver> predicted,
    int consecutive) {
  if (segments.size() != predicted.size()) {
    throw ArgumentError("prediction_points: segment/prediction count mismatch");
  }
  std::map<int, std::vector<FramePrediction>> per_vehicle;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    per_vehicle[segments[i].vehicle_id].push_back(
        FramePrediction{segments[i].end_frame, predicted[i]});
  }
  std::vector<PredictionPoint> out;
  for (auto& [id, timeline] : per_vehicle) {
    std::sort(timeline.begin(), timeline.end(),
              [](const auto& a, const auto& b) { return a.frame < b.frame; });
    const auto points = prediction_points(id, timeline, consecutive);
    out.insert(out.end(), points.begin(), points.end());
  }
  return out;
}

std::string_view to_string(EventOutcome outcome) {
  switch (outcome) {
    case EventOutcome::kPredicted:
      return "predicted";
    case EventOutcome::kLate:
      return "late";
    case EventOutcome::kMissed:
      return "missed";
  }
  return "?";
}

void summarize_timings(PredictionTimeReport& report) {
  report.predicted = report.late = report.missed = 0;
  report.mean_seconds = report.median_seconds = 0.0;
  report.mean_late_seconds = report.miss_rate = 0.0;
  std::vector<double> times;
  double late_sum = 0.0;
  for (const EventTiming& t : report.events) {
    if (t.outcome == EventOutcome::kMissed) {
      ++report.missed;
    } else if (t.outcome == EventOutcome::kPredicted) {
      ++report.predicted;
      times.push_back(t.seconds);
    } else {
      ++report.late;
      late_sum += t.seconds;
    }
  }
  if (!times.empty()) {
    double sum = 0.0;
    for (double s : times) sum += s;
    report.mean_seconds = sum / static_cast<double>(times.size());
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    report.median_seconds = times.size() % 2 == 1
                                ? times[mid]
                                : 0.5 * (times[mid - 1] + times[mid]);
  }
  if (report.late > 0) {
    report.mean_late_seconds = late_sum / static_cast<double>(report.late);
  }
  if (!report.events.empty()) {
    report.miss_rate = static_cast<double>(report.missed) /
                       static_cast<double>(report.events.size());
  }
}

PredictionTimeReport prediction_time(std::span<const PredictionPoint> points,
                                     std::span<const LaneChangeEvent> events,
                                     double frame_rate, double horizon_s) {
  if (!(frame_rate > 0.0) || !(horizon_s >= 0.0)) {
    throw ArgumentError("prediction_time: frame_rate must be > 0, horizon >= 0");
  }
  const long horizon = std::lround(horizon_s * frame_rate);
  PredictionTimeReport report;
  for (const LaneChangeEvent& e : events) report.events.push_back(EventTiming{e});

  std::vector<const PredictionPoint*> sorted;
  for (const PredictionPoint& p : points) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->vehicle_id, a->frame) < std::tie(b->vehicle_id, b->frame);
  });

  const auto same_track = [](const LaneChangeEvent& e, const PredictionPoint& p) {
    return e.vehicle_id == p.vehicle_id && e.direction == p.direction;
  };
  std::vector<const PredictionPoint*> unmatched;
  for (const PredictionPoint* p : sorted) {
    EventTiming* best = nullptr;
    for (EventTiming& t : report.events) {
      const long lead = t.event.cross_frame - p->frame;
      if (!same_track(t.event, *p) || lead < 0 || lead > horizon) continue;
      if (best == nullptr || t.event.cross_frame < best->event.cross_frame) {
        best = &t;
      }
    }
    if (best == nullptr) {
      unmatched.push_back(p);
    } else if (best->outcome != EventOutcome::kPredicted) {
      best->outcome = EventOutcome::kPredicted;
      best->prediction_frame = p->frame;
    }
  }
  for (const PredictionPoint* p : unmatched) {
    EventTiming* best = nullptr;
    for (EventTiming& t : report.events) {
      const long lag = p->frame - t.event.cross_frame;
      if (!same_track(t.event, *p) || lag <= 0 || lag > horizon ||
          t.outcome == EventOutcome::kPredicted) {
        continue;
      }
      if (best == nullptr || t.event.cross_frame > best->event.cross_frame) {
        best = &t;
      }
    }
    if (best == nullptr) {
      ++report.false_alarms;
    } else if (best->outcome == EventOutcome::kMissed) {
      best->outcome = EventOutcome::kLate;
      best->prediction_frame = p->frame;
    }
  }

  for (EventTiming& t : report.events) {
    if (t.outcome != EventOutcome::kMissed) {
      t.seconds = (t.event.cross_frame - t.prediction_frame) / frame_rate;
    }
  }
  summarize_timings(report);
  return report;
}

std::vector<SweepSummary> summarize(std::span<const SweepRow> rows) {
  std::vector<SweepSummary> out;
  std::vector<std::vector<const SweepRow*>> groups;
  for (const SweepRow& row : rows) {
    std::size_t g = 0;
    while (g < out.size() && (out[g].kind != row.kind || out[g].n != row.n)) ++g;
    if (g == out.size()) {
      out.push_back(SweepSummary{row.kind, row.n});
      groups.emplace_back();
    }
    groups[g].push_back(&row);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    SweepSummary& s = out[g];
    s.runs = groups[g].size();
    const double runs = static_cast<double>(s.runs);
    for (const SweepRow* r : groups[g]) {
      for (int c = 0; c < kNumClasses; ++c) {
        s.mean_class[static_cast<std::size_t>(c)] += r->cm.class_accuracy(c) / runs;
      }
      s.mean_overall += r->cm.overall() / runs;
    }
    if (s.runs > 1) {
      double ss = 0.0;
      for (const SweepRow* r : groups[g]) {
        const double d = r->cm.overall() - s.mean_overall;
        ss += d * d;
      }
      s.std_overall = std::sqrt(ss / (runs - 1.0));
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "model,n,seed,acc_left,acc_follow,acc_right,overall,epochs,best_epoch\n";
  for (const SweepRow& r : rows) {
    out << display_name(r.kind) << "," << r.n << "," << r.seed;
    for (int c = 0; c < kNumClasses; ++c) out << "," << format_fixed(r.cm.class_accuracy(c));
    out << "," << format_fixed(r.cm.overall()) << "," << r.epochs << ","
        << r.best_epoch << "\n";
  }
}

void write_sweep_summary_csv(std::ostream& out,
                             std::span<const SweepSummary> summary) {
  out << "model,n,runs,mean_left,mean_follow,mean_right,mean_overall,std_overall\n";
  for (const SweepSummary& s : summary) {
    out << display_name(s.kind) << "," << s.n << "," << s.runs;
    for (double m : s.mean_class) out << "," << format_fixed(m);
    out << "," << format_fixed(s.mean_overall) << ","
        << format_fixed(s.std_overall) << "\n";
  }
}

void write_sweep_timing_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "model,n,seed,train_seconds\n";
  for (const SweepRow& r : rows) {
    out << display_name(r.kind) << "," << r.n << "," << r.seed << ","
        << format_fixed(r.train_seconds) << "\n";
  }
}

void write_sweep_svg(std::ostream& out, std::span<const SweepSummary> summary) {
  constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 150,
                   kTop = 30, kBottom = 60;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e"};
  if (summary.empty()) throw ArgumentError("sweep plot: no rows");
  int n_min = summary.front().n, n_max = summary.front().n;
  double a_min = summary.front().mean_overall, a_max = a_min;
  for (const SweepSummary& s : summary) {
    n_min = std::min(n_min, s.n);
    n_max = std::max(n_max, s.n);
    a_min = std::min(a_min, s.mean_overall);
    a_max = std::max(a_max, s.mean_overall);
  }
  a_min = std::max(0.0, std::floor(a_min) - 1.0);
  a_max = std::min(100.0, std::ceil(a_max) + 1.0);
  if (a_max <= a_min) a_max = a_min + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](int n) {
    return n_max == n_min ? kLeft + plot_w / 2
                          : kLeft + plot_w * (n - n_min) / double(n_max - n_min);
  };
  const auto py = [&](double a) {
    return kTop + plot_h * (1.0 - (a - a_min) / (a_max - a_min));
  };
  const auto num = [](double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", v);
    return std::string(buffer);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  std::vector<int> ns;
  for (const SweepSummary& s : summary) {
    if (std::find(ns.begin(), ns.end(), s.n) == ns.end()) ns.push_back(s.n);
  }
  for (int n : ns) {
    out << "<text x=\"" << num(px(n)) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double a = a_min + (a_max - a_min) * i / 4.0;
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(a) + 4)
        << "\" text-anchor=\"end\">" << num(a) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">history length n (steps)</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">mean accuracy (%)</text>\n";

  std::vector<ModelKind> kinds;
  for (const SweepSummary& s : summary) {
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) {
      kinds.push_back(s.kind);
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::vector<const SweepSummary*> line;
    for (const SweepSummary& s : summary) {
      if (s.kind == kinds[k]) line.push_back(&s);
    }
    std::sort(line.begin(), line.end(),
              [](const auto* a, const auto* b) { return a->n < b->n; });
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline class=\"curve\" data-model=\"" << display_name(kinds[k])
        << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) out << " ";
      out << num(px(line[i]->n)) << "," << num(py(line[i]->mean_overall));
    }
    out << "\"/>\n";
    for (const SweepSummary* s : line) {
      out << "<circle cx=\"" << num(px(s->n)) << "\" cy=\""
          << num(py(s->mean_overall)) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = kTop + 20.0 * static_cast<double>(k);
    out << "<line x1=\"" << kWidth - kRight + 15 << "\" y1=\"" << ly
        << "\" x2=\"" << kWidth - kRight + 40 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 46 << "\" y=\"" << ly + 4
        << "\">" << display_name(kinds[k]) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace lcp
