#pragma once

#include "leakscope/corpus.hpp"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

using WordSet = std::set<std::string>;

struct FilterOptions {
  bool lowercase = true;
  // Drop one trailing 's' from tokens longer than three characters that do
  // not end in "ss" ("dogs" -> "dog", "glass" and "bus" unchanged).
  bool strip_plural_s = false;
  WordSet extra_stopwords;
};

struct RemovedRecord {
  ItemRecord record;
  // Class words found in any caption of the record's audio id.
  WordSet matched_words;
};

struct FilterReport {
  std::vector<ItemRecord> kept;
  std::vector<RemovedRecord> removed;
  WordSet class_word_vocabulary;
  double removal_rate = 0.0;
  // Per class word: number of records whose own caption contains it.
  std::map<std::string, std::size_t> word_match_counts;
  std::size_t removed_audio_ids = 0;
};

struct LeakCheck {
  bool leaky = false;
  WordSet matched;
};

std::string normalize_token(std::string_view token, const FilterOptions &opts);

// Words of the class labels, split on whitespace, '_' and '-'.
WordSet class_word_set(const std::vector<std::string> &class_labels, const FilterOptions &opts);

// Tokenizes on any non-alphanumeric ASCII character (bytes >= 0x80 count as
// word characters so UTF-8 words stay whole).
std::vector<std::string> caption_tokens(std::string_view caption, const FilterOptions &opts);
LeakCheck caption_is_leaky(std::string_view caption, const WordSet &words, const FilterOptions &opts);

// Records sharing an id are captions of the same audio; one leaky caption
// removes every record of that audio. Output order follows input order.
FilterReport filter_dataset(const std::vector<ItemRecord> &records,
                            const std::vector<std::string> &class_labels, const FilterOptions &opts);

} // namespace leakscope
