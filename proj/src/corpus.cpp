#include "leakscope/corpus.hpp"

#include "file_util.hpp"
#include "leakscope/error.hpp"
#include "leakscope/npy.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <unordered_set>

namespace leakscope {

using nlohmann::json;

std::string_view role_tag(Role role) {
  switch (role) {
  case Role::AudioUnimodal:
    return "x_a";
  case Role::AudioCrossModal:
    return "E_a";
  case Role::TextUnimodal:
    return "x_t";
  case Role::TextCrossModal:
    return "E_t";
  }
  return "?";
}

Role parse_role(std::string_view tag) {
  if (tag == "x_a")
    return Role::AudioUnimodal;
  if (tag == "E_a")
    return Role::AudioCrossModal;
  if (tag == "x_t")
    return Role::TextUnimodal;
  if (tag == "E_t")
    return Role::TextCrossModal;
  throw ValidationError("unknown role '" + std::string(tag) + "' (expected x_a, E_a, x_t, E_t)");
}

bool is_audio(Role role) { return role == Role::AudioUnimodal || role == Role::AudioCrossModal; }

std::string_view split_name(Split split) {
  switch (split) {
  case Split::Train:
    return "train";
  case Split::Validation:
    return "validation";
  case Split::Test:
    return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train")
    return Split::Train;
  if (name == "validation")
    return Split::Validation;
  if (name == "test")
    return Split::Test;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

EmbeddingSet::EmbeddingSet(Role role, std::vector<std::string> ids, Matrix matrix,
                           std::optional<std::vector<std::string>> labels)
    : role_(role), ids_(std::move(ids)), labels_(std::move(labels)), matrix_(std::move(matrix)) {
  if (ids_.size() != matrix_.rows())
    throw ValidationError("embedding set: " + std::to_string(ids_.size()) + " ids for " +
                          std::to_string(matrix_.rows()) + " matrix rows");
  if (labels_ && labels_->size() != ids_.size())
    throw ValidationError("embedding set: " + std::to_string(labels_->size()) + " labels for " +
                          std::to_string(ids_.size()) + " ids");
  std::unordered_set<std::string_view> seen;
  for (const auto &id : ids_)
    if (!seen.insert(id).second)
      throw ValidationError("embedding set: duplicate id '" + id + "'");
  for (std::size_t r = 0; r < matrix_.rows(); ++r)
    for (std::size_t c = 0; c < matrix_.cols(); ++c)
      if (!std::isfinite(matrix_(r, c)))
        throw ValidationError("embedding set: non-finite value at row " + std::to_string(r) +
                              ", column " + std::to_string(c) + " (id '" + ids_[r] + "')");
}

EmbeddingSet EmbeddingSet::with_matrix(Matrix matrix) const {
  return EmbeddingSet(role_, ids_, std::move(matrix), labels_);
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

void check_record(const ItemRecord &rec, std::size_t line_no, const ManifestOptions &opts,
                  std::unordered_set<std::string> &seen) {
  const std::string where = "manifest line " + std::to_string(line_no);
  if (rec.id.empty())
    throw ValidationError(where + ": missing required field 'id'");
  if (opts.require_label && rec.label.empty())
    throw ValidationError(where + ": missing required field 'label'");
  if (opts.unique_ids && !seen.insert(rec.id).second)
    throw ValidationError(where + ": duplicate id '" + rec.id + "'");
}

// RFC 4180 record splitter; quoted fields may contain commas, quotes ("") and
// newlines. Returns records with the 1-based line each one started on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> csv_records(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> out;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1, record_line = 1;
  auto finish = [&] {
    fields.push_back(std::move(field));
    field.clear();
    if (!(fields.size() == 1 && fields[0].empty() && !any))
      out.emplace_back(record_line, std::move(fields));
    fields.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n')
          ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
    case '"':
      quoted = true;
      any = true;
      break;
    case ',':
      fields.push_back(std::move(field));
      field.clear();
      any = true;
      break;
    case '\r':
      break;
    case '\n':
      finish();
      ++line;
      record_line = line;
      break;
    default:
      field.push_back(c);
      any = true;
    }
  }
  if (quoted)
    throw ValidationError("csv: unterminated quoted field starting on line " +
                          std::to_string(record_line));
  if (!field.empty() || !fields.empty() || any)
    finish();
  return out;
}

} // namespace

std::vector<ItemRecord> parse_manifest_jsonl(std::string_view text, const ManifestOptions &opts) {
  std::vector<ItemRecord> records;
  std::unordered_set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i]))
      continue;
    const std::size_t line_no = i + 1;
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::parse_error &e) {
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
    }
    if (!obj.is_object())
      throw ValidationError("manifest line " + std::to_string(line_no) + ": expected an object");

    auto string_field = [&](const char *name) -> std::optional<std::string> {
      auto it = obj.find(name);
      if (it == obj.end() || it->is_null())
        return std::nullopt;
      if (!it->is_string())
        throw ValidationError("manifest line " + std::to_string(line_no) + ": field '" + name +
                              "' must be a string");
      return it->get<std::string>();
    };

    ItemRecord rec;
    rec.id = string_field("id").value_or("");
    rec.label = string_field("label").value_or("");
    rec.caption = string_field("caption");
    if (auto s = string_field("split"))
      rec.split = parse_split(*s);
    check_record(rec, line_no, opts, seen);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ItemRecord> parse_manifest_csv(std::string_view text, const ManifestOptions &opts) {
  const auto rows = csv_records(text);
  if (rows.empty())
    throw ValidationError("csv manifest: missing header row");
  const auto &header = rows.front().second;
  int id_col = -1, label_col = -1, caption_col = -1, split_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto &h = header[c];
    if (h == "id")
      id_col = static_cast<int>(c);
    else if (h == "label")
      label_col = static_cast<int>(c);
    else if (h == "caption")
      caption_col = static_cast<int>(c);
    else if (h == "split")
      split_col = static_cast<int>(c);
  }
  if (id_col < 0)
    throw ValidationError("csv manifest: header lacks required column 'id'");
  if (label_col < 0 && opts.require_label)
    throw ValidationError("csv manifest: header lacks required column 'label'");

  std::vector<ItemRecord> records;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &[line_no, fields] = rows[r];
    auto get = [&](int col) -> std::string {
      return col >= 0 && static_cast<std::size_t>(col) < fields.size() ? fields[col] : "";
    };
    ItemRecord rec;
    rec.id = get(id_col);
    rec.label = get(label_col);
    if (caption_col >= 0 && static_cast<std::size_t>(caption_col) < fields.size())
      rec.caption = fields[caption_col];
    if (const auto s = get(split_col); !s.empty())
      rec.split = parse_split(s);
    check_record(rec, line_no, opts, seen);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ItemRecord> read_manifest(const std::filesystem::path &path,
                                      const ManifestOptions &opts) {
  const std::string text = detail::read_text(path);
  try {
    if (path.extension() == ".csv")
      return parse_manifest_csv(text, opts);
    return parse_manifest_jsonl(text, opts);
  } catch (const ValidationError &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string record_to_json_line(const ItemRecord &record) {
  json obj = json::object();
  obj["id"] = record.id;
  obj["label"] = record.label;
  if (record.caption)
    obj["caption"] = *record.caption;
  if (record.split)
    obj["split"] = std::string(split_name(*record.split));
  return obj.dump();
}

void write_manifest(const std::vector<ItemRecord> &records, const std::filesystem::path &path) {
  std::string text;
  if (path.extension() == ".csv") {
    text = "id,label,caption,split\n";
    for (const auto &r : records) {
      text += detail::csv_field(r.id) + "," + detail::csv_field(r.label) + "," +
              detail::csv_field(r.caption.value_or("")) + "," +
              (r.split ? std::string(split_name(*r.split)) : std::string()) + "\n";
    }
  } else {
    for (const auto &r : records)
      text += record_to_json_line(r) + "\n";
  }
  detail::write_text(path, text);
}

std::string normalize_label(std::string_view label) {
  std::string out;
  bool pending_space = false;
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space)
      out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Matrix parse_matrix_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i]))
      continue;
    std::vector<double> row;
    bool numeric = true;
    std::string_view rest = lines[i];
    while (true) {
      const std::size_t comma = rest.find(',');
      std::string_view cell = rest.substr(0, comma);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t'))
        cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t'))
        cell.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        numeric = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
    if (!numeric) {
      if (rows == 0 && values.empty())
        continue; // header line
      throw ValidationError("csv matrix: non-numeric cell on line " + std::to_string(i + 1));
    }
    if (rows == 0)
      cols = row.size();
    else if (row.size() != cols)
      throw ValidationError("csv matrix: line " + std::to_string(i + 1) + " has " +
                            std::to_string(row.size()) + " columns, expected " +
                            std::to_string(cols));
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  return Matrix(rows, cols, std::move(values));
}

Matrix read_matrix(const std::filesystem::path &path) {
  if (path.extension() == ".csv")
    return parse_matrix_csv(detail::read_text(path));
  return npy::read(path);
}

EmbeddingSet bind_embedding_set(Matrix matrix, const std::vector<ItemRecord> &records, Role role) {
  if (matrix.rows() != records.size())
    throw ValidationError("row count mismatch: matrix has " + std::to_string(matrix.rows()) +
                          " rows, manifest has " + std::to_string(records.size()) + " records");
  std::vector<std::string> ids, labels;
  ids.reserve(records.size());
  labels.reserve(records.size());
  bool all_labeled = true;
  for (const auto &r : records) {
    ids.push_back(r.id);
    labels.push_back(r.label);
    all_labeled = all_labeled && !r.label.empty();
  }
  std::optional<std::vector<std::string>> maybe_labels;
  if (all_labeled)
    maybe_labels = std::move(labels);
  return EmbeddingSet(role, std::move(ids), std::move(matrix), std::move(maybe_labels));
}

EmbeddingSet load_embedding_set(const std::filesystem::path &matrix_path,
                                const std::filesystem::path &manifest_path, Role role) {
  auto records = read_manifest(manifest_path);
  try {
    return bind_embedding_set(read_matrix(matrix_path), records, role);
  } catch (const ValidationError &e) {
    throw ValidationError(matrix_path.string() + ": " + e.what());
  }
}

} // namespace leakscope
