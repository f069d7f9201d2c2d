#include "leakscope/leakage_filter.hpp"

#include "leakscope/error.hpp"

#include <cctype>
#include <unordered_map>

namespace leakscope {

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

bool is_label_separator(char c) {
  return c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c));
}

template <typename IsSeparator>
std::vector<std::string> split_normalized(std::string_view text, const FilterOptions &opts,
                                          IsSeparator is_sep) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_sep(text[i]))
      ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_sep(text[i]))
      ++i;
    if (i > start) {
      auto tok = normalize_token(text.substr(start, i - start), opts);
      if (!tok.empty() && !opts.extra_stopwords.contains(tok))
        out.push_back(std::move(tok));
    }
  }
  return out;
}

} // namespace

std::string normalize_token(std::string_view token, const FilterOptions &opts) {
  std::string out(token);
  if (opts.lowercase)
    for (char &c : out)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (opts.strip_plural_s && out.size() > 3) {
    const char last = out.back();
    const char before = out[out.size() - 2];
    if ((last == 's' || last == 'S') && before != 's' && before != 'S')
      out.pop_back();
  }
  return out;
}

WordSet class_word_set(const std::vector<std::string> &class_labels, const FilterOptions &opts) {
  if (class_labels.empty())
    throw ValidationError("class_word_set: empty class label list");
  WordSet words;
  for (const auto &label : class_labels)
    for (auto &w : split_normalized(label, opts, is_label_separator))
      words.insert(std::move(w));
  return words;
}

std::vector<std::string> caption_tokens(std::string_view caption, const FilterOptions &opts) {
  return split_normalized(caption, opts, [](char c) { return !is_word_byte(c); });
}

LeakCheck caption_is_leaky(std::string_view caption, const WordSet &words,
                           const FilterOptions &opts) {
  LeakCheck check;
  for (auto &tok : caption_tokens(caption, opts))
    if (words.contains(tok))
      check.matched.insert(std::move(tok));
  check.leaky = !check.matched.empty();
  return check;
}

FilterReport filter_dataset(const std::vector<ItemRecord> &records,
                            const std::vector<std::string> &class_labels,
                            const FilterOptions &opts) {
  std::vector<std::string> uncaptioned;
  for (const auto &r : records)
    if (!r.caption)
      uncaptioned.push_back(r.id);
  if (!uncaptioned.empty()) {
    std::string msg = "filter: " + std::to_string(uncaptioned.size()) + " record(s) lack a caption:";
    for (std::size_t i = 0; i < uncaptioned.size() && i < 10; ++i)
      msg += " '" + uncaptioned[i] + "'";
    if (uncaptioned.size() > 10)
      msg += " ...";
    throw ValidationError(msg);
  }

  FilterReport rep;
  rep.class_word_vocabulary = class_word_set(class_labels, opts);
  for (const auto &w : rep.class_word_vocabulary)
    rep.word_match_counts[w] = 0;

  std::unordered_map<std::string, WordSet> matched_by_audio;
  for (const auto &r : records) {
    auto check = caption_is_leaky(*r.caption, rep.class_word_vocabulary, opts);
    auto &acc = matched_by_audio[r.id];
    for (const auto &w : check.matched) {
      ++rep.word_match_counts[w];
      acc.insert(w);
    }
  }

  for (const auto &r : records) {
    const auto &matched = matched_by_audio.at(r.id);
    if (matched.empty())
      rep.kept.push_back(r);
    else
      rep.removed.push_back({r, matched});
  }
  for (const auto &[id, matched] : matched_by_audio)
    rep.removed_audio_ids += !matched.empty();
  rep.removal_rate = records.empty() ? 0.0
                                     : static_cast<double>(rep.removed.size()) /
                                           static_cast<double>(records.size());
  return rep;
}

} // namespace leakscope
