#pragma once

#include "leakscope/matrix.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

// Where an embedding matrix sits in the audio/text x unimodal/cross-modal grid.
enum class Role { AudioUnimodal, AudioCrossModal, TextUnimodal, TextCrossModal };

// Short tags used in configs and reports: x_a, E_a, x_t, E_t.
std::string_view role_tag(Role role);
Role parse_role(std::string_view tag);
bool is_audio(Role role);

enum class Split { Train, Validation, Test };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct ItemRecord {
  std::string id;
  std::string label;
  std::optional<std::string> caption;
  std::optional<Split> split;

  bool operator==(const ItemRecord &) const = default;
};

// An id-aligned matrix: row i belongs to ids[i] (and labels[i] when present).
// Construction validates the invariants; the object is immutable afterwards.
class EmbeddingSet {
public:
  EmbeddingSet(Role role, std::vector<std::string> ids, Matrix matrix,
               std::optional<std::vector<std::string>> labels = std::nullopt);

  Role role() const { return role_; }
  const std::vector<std::string> &ids() const { return ids_; }
  const std::optional<std::vector<std::string>> &labels() const { return labels_; }
  const Matrix &matrix() const { return matrix_; }
  std::size_t size() const { return matrix_.rows(); }
  std::size_t dim() const { return matrix_.cols(); }

  // Same ids/labels/role with a replaced matrix of identical row count.
  EmbeddingSet with_matrix(Matrix matrix) const;

private:
  Role role_;
  std::vector<std::string> ids_;
  std::optional<std::vector<std::string>> labels_;
  Matrix matrix_;
};

struct ManifestOptions {
  // Caption corpora list one record per (audio, caption) pair, so the same
  // audio id repeats and there may be no class label.
  bool unique_ids = true;
  bool require_label = true;
};

// JSON-lines (one object per line) or CSV with header id,label[,caption][,split].
// Format is chosen by extension: .csv is CSV, anything else JSON-lines.
std::vector<ItemRecord> parse_manifest_jsonl(std::string_view text, const ManifestOptions &opts = {});
std::vector<ItemRecord> parse_manifest_csv(std::string_view text, const ManifestOptions &opts = {});
std::vector<ItemRecord> read_manifest(const std::filesystem::path &path,
                                      const ManifestOptions &opts = {});

std::string record_to_json_line(const ItemRecord &record);
void write_manifest(const std::vector<ItemRecord> &records, const std::filesystem::path &path);

// Lowercased, surrounding whitespace trimmed, inner whitespace runs collapsed
// to one space. Used wherever audio labels are matched against class ids.
std::string normalize_label(std::string_view label);

// NPY by default; .csv files hold one row per line, '.' decimal separator.
Matrix read_matrix(const std::filesystem::path &path);
Matrix parse_matrix_csv(std::string_view text);

EmbeddingSet bind_embedding_set(Matrix matrix, const std::vector<ItemRecord> &records, Role role);
EmbeddingSet load_embedding_set(const std::filesystem::path &matrix_path,
                                const std::filesystem::path &manifest_path, Role role);

} // namespace leakscope
