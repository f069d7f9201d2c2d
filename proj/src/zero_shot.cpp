#include "leakscope/zero_shot.hpp"

#include "file_util.hpp"
#include "leakscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace leakscope {

namespace {

struct ClassTable {
  std::vector<std::string> ids;                     // ascending
  std::vector<std::vector<double>> unit_rows;       // same order
  std::unordered_map<std::string, std::size_t> by_normalized;
};

std::vector<double> unit(std::span<const double> v, const std::string &what) {
  double norm = 0.0;
  for (double x : v)
    norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0)
    throw ValidationError("zero-shot: " + what + " is a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double &x : out)
    x /= norm;
  return out;
}

ClassTable build_classes(const EmbeddingSet &class_text) {
  if (class_text.size() == 0)
    throw ValidationError("zero-shot: class text set is empty");
  std::vector<std::size_t> order(class_text.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return class_text.ids()[a] < class_text.ids()[b];
  });
  ClassTable t;
  for (std::size_t r : order) {
    const auto &id = class_text.ids()[r];
    if (!t.by_normalized.emplace(normalize_label(id), t.ids.size()).second)
      throw ValidationError("zero-shot: class ids collide after normalization at '" + id + "'");
    t.ids.push_back(id);
    t.unit_rows.push_back(unit(class_text.matrix().row(r), "class row '" + id + "'"));
  }
  return t;
}

std::vector<std::size_t> predict(const EmbeddingSet &audio, const ClassTable &classes) {
  if (audio.dim() != classes.unit_rows.front().size())
    throw ValidationError("zero-shot: audio dimension " + std::to_string(audio.dim()) +
                          " differs from class dimension " +
                          std::to_string(classes.unit_rows.front().size()));
  std::vector<std::size_t> out(audio.size());
  for (std::size_t i = 0; i < audio.size(); ++i) {
    const auto a = unit(audio.matrix().row(i), "audio row " + std::to_string(i));
    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes.ids.size(); ++c) {
      double sim = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k)
        sim += a[k] * classes.unit_rows[c][k];
      if (sim > best_sim) {
        best_sim = sim;
        best = c;
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<std::size_t> truth_indices(const EmbeddingSet &audio, const ClassTable &classes) {
  if (!audio.labels())
    throw ValidationError("zero-shot: audio set has no labels");
  std::vector<std::size_t> truth(audio.size());
  for (std::size_t i = 0; i < audio.size(); ++i) {
    const auto &label = (*audio.labels())[i];
    auto it = classes.by_normalized.find(normalize_label(label));
    if (it == classes.by_normalized.end())
      throw ValidationError("zero-shot: audio item '" + audio.ids()[i] + "' has label '" + label +
                            "' which is not among the class ids");
    truth[i] = it->second;
  }
  return truth;
}

} // namespace

std::vector<std::string> classify(const EmbeddingSet &audio, const EmbeddingSet &class_text) {
  const ClassTable classes = build_classes(class_text);
  if (audio.labels())
    truth_indices(audio, classes);
  std::vector<std::string> out;
  out.reserve(audio.size());
  for (std::size_t c : predict(audio, classes))
    out.push_back(classes.ids[c]);
  return out;
}

ZeroShotReport evaluate(const EmbeddingSet &audio, const EmbeddingSet &class_text) {
  const ClassTable classes = build_classes(class_text);
  const auto truth = truth_indices(audio, classes);
  if (audio.size() == 0)
    throw ValidationError("zero-shot: audio set is empty");
  const auto pred = predict(audio, classes);

  const std::size_t c = classes.ids.size();
  ZeroShotReport rep;
  rep.classes = classes.ids;
  rep.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < audio.size(); ++i) {
    ++rep.confusion[truth[i]][pred[i]];
    correct += truth[i] == pred[i];
    rep.predictions.push_back(classes.ids[pred[i]]);
  }
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(audio.size());
  for (std::size_t t = 0; t < c; ++t) {
    const std::size_t count =
        std::accumulate(rep.confusion[t].begin(), rep.confusion[t].end(), std::size_t{0});
    if (count > 0)
      rep.per_class_accuracy[classes.ids[t]] =
          static_cast<double>(rep.confusion[t][t]) / static_cast<double>(count);
  }
  return rep;
}

std::string confusion_csv(const ZeroShotReport &report) {
  std::string out = "truth\\prediction";
  for (const auto &c : report.classes)
    out += "," + detail::csv_field(c);
  out += "\n";
  for (std::size_t t = 0; t < report.classes.size(); ++t) {
    out += detail::csv_field(report.classes[t]);
    for (std::size_t count : report.confusion[t])
      out += "," + std::to_string(count);
    out += "\n";
  }
  return out;
}

} // namespace leakscope
