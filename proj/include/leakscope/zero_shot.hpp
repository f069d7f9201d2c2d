#pragma once

#include "leakscope/corpus.hpp"

#include <map>
#include <string>
#include <vector>

namespace leakscope {

struct ZeroShotReport {
  double accuracy = 0.0;
  std::vector<std::string> classes;                 // ascending; confusion axis order
  std::map<std::string, double> per_class_accuracy; // classes that have items
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
  std::vector<std::string> predictions;             // class id per audio item
};

// Nearest class by cosine similarity; ties go to the smaller class id.
// `class_text` holds one row per class, its ids being the class names.
std::vector<std::string> classify(const EmbeddingSet &audio, const EmbeddingSet &class_text);

// Audio labels are matched to class ids through normalize_label.
ZeroShotReport evaluate(const EmbeddingSet &audio, const EmbeddingSet &class_text);

std::string confusion_csv(const ZeroShotReport &report);

} // namespace leakscope
