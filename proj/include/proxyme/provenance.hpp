#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyme/types.hpp"

namespace proxyme {

/// One step of a word-granularity edit script. Keep and Delete count words of
/// the source; Insert carries literal text of the derived string.
struct EditOp {
  enum class Kind { Keep, Insert, Delete };

  Kind kind = Kind::Keep;
  std::size_t count = 0;
  std::string text;

  static EditOp keep(std::size_t n) { return {Kind::Keep, n, {}}; }
  static EditOp insert(std::string t) { return {Kind::Insert, 0, std::move(t)}; }
  static EditOp erase(std::size_t n) { return {Kind::Delete, n, {}}; }

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

using EditScript = std::vector<EditOp>;

/// Splits text into words that own their trailing whitespace; leading
/// whitespace, if any, forms its own token. Concatenating the tokens gives
/// the text back exactly.
std::vector<std::string> word_tokens(std::string_view text);

/// Longest-common-subsequence alignment over word tokens. Adjacent ops of the
/// same kind are merged; Delete precedes Insert inside a changed region.
EditScript derive_edit_script(std::string_view source, std::string_view derived);

/// Replays a script over `source`. Throws RoundTripMismatch if the script
/// reaches past the source or leaves source words unconsumed.
std::string apply_edit_script(std::string_view source, const EditScript& script);

struct ProvenanceRecord {
  std::string provenance_id;
  std::string session_id;
  std::string source_utterance_id;
  std::string derived_utterance_id;
  SpeakerOrigin derived_origin = SpeakerOrigin::AvatarExtension;
  std::string source_text;
  std::string derived_text;
  Condition condition;
  EditScript edit_script;
  bool aborted = false;
  Millis created_at = 0;

  friend bool operator==(const ProvenanceRecord&, const ProvenanceRecord&) = default;
};

struct ProvenanceFilter {
  std::optional<SpeakerOrigin> origin;
  std::optional<Condition> condition;
  bool include_aborted = false;
};

/// Append-only authorship ledger. Safe for concurrent use; every append is
/// atomic and queries see a consistent prefix. With a data directory, each
/// record is also written as one JSON line to <session_id>.prov.jsonl.
class ProvenanceLedger {
 public:
  explicit ProvenanceLedger(std::optional<std::filesystem::path> data_dir = std::nullopt);

  /// Makes a Participant utterance citable as a source.
  void register_source(const Utterance& utterance);

  /// Throws UnknownSourceUtterance, RoundTripMismatch, or ValidationError on a
  /// duplicate provenance_id.
  void append(const ProvenanceRecord& record);

  std::vector<ProvenanceRecord> query(std::string_view session_id,
                                      const ProvenanceFilter& filter = {}) const;
  std::size_t size() const;

  /// Reads a ledger file back, re-checking every record's round trip.
  static std::vector<ProvenanceRecord> load_file(const std::filesystem::path& path);

 private:
  std::optional<std::filesystem::path> data_dir_;
  mutable std::mutex mutex_;
  std::vector<ProvenanceRecord> records_;
  std::map<std::string, std::pair<SpeakerOrigin, std::string>, std::less<>> sources_;
};

}  // namespace proxyme
