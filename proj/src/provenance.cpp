#include "proxyme/provenance.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "proxyme/json_io.hpp"

namespace proxyme {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

void push_op(EditScript& script, EditOp op) {
  if (!script.empty() && script.back().kind == op.kind) {
    script.back().count += op.count;
    script.back().text += op.text;
  } else {
    script.push_back(std::move(op));
  }
}

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  if (i < text.size() && is_space(text[i])) {
    while (i < text.size() && is_space(text[i])) ++i;
    tokens.emplace_back(text.substr(0, i));
  }
  while (i < text.size()) {
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    while (i < text.size() && is_space(text[i])) ++i;
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

EditScript derive_edit_script(std::string_view source, std::string_view derived) {
  const auto a = word_tokens(source);
  const auto b = word_tokens(derived);
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  // lcs[i][j]: LCS length of a[i..] and b[j..].
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                               : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  EditScript script;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t pending_delete = 0;
  std::string pending_insert;
  const auto flush = [&] {
    if (pending_delete > 0) push_op(script, EditOp::erase(pending_delete));
    if (!pending_insert.empty()) push_op(script, EditOp::insert(pending_insert));
    pending_delete = 0;
    pending_insert.clear();
  };
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      flush();
      push_op(script, EditOp::keep(1));
      ++i;
      ++j;
    } else if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
      pending_insert += b[j++];
    } else {
      ++pending_delete;
      ++i;
    }
  }
  flush();
  return script;
}

std::string apply_edit_script(std::string_view source, const EditScript& script) {
  const auto tokens = word_tokens(source);
  std::string out;
  std::size_t pos = 0;
  for (const EditOp& op : script) {
    switch (op.kind) {
      case EditOp::Kind::Keep:
        if (pos + op.count > tokens.size()) throw RoundTripMismatch("Keep past end of source");
        for (std::size_t k = 0; k < op.count; ++k) out += tokens[pos++];
        break;
      case EditOp::Kind::Delete:
        if (pos + op.count > tokens.size()) throw RoundTripMismatch("Delete past end of source");
        pos += op.count;
        break;
      case EditOp::Kind::Insert:
        out += op.text;
        break;
    }
  }
  if (pos != tokens.size()) {
    throw RoundTripMismatch("script leaves " + std::to_string(tokens.size() - pos) +
                            " source words unconsumed");
  }
  return out;
}

namespace {

void check_round_trip(const ProvenanceRecord& r) {
  if (apply_edit_script(r.source_text, r.edit_script) != r.derived_text) {
    throw RoundTripMismatch("record " + r.provenance_id +
                            ": edit script does not reproduce the derived text");
  }
}

}  // namespace

ProvenanceLedger::ProvenanceLedger(std::optional<std::filesystem::path> data_dir)
    : data_dir_(std::move(data_dir)) {
  if (data_dir_) std::filesystem::create_directories(*data_dir_);
}

void ProvenanceLedger::register_source(const Utterance& utterance) {
  std::lock_guard lock(mutex_);
  sources_[utterance.utterance_id] = {utterance.origin, utterance.text};
}

void ProvenanceLedger::append(const ProvenanceRecord& record) {
  std::lock_guard lock(mutex_);
  auto src = sources_.find(record.source_utterance_id);
  if (src == sources_.end() || src->second.first != SpeakerOrigin::Participant) {
    throw UnknownSourceUtterance("no Participant utterance '" + record.source_utterance_id + "'");
  }
  if (src->second.second != record.source_text) {
    throw RoundTripMismatch("record " + record.provenance_id +
                            ": source text differs from the registered utterance");
  }
  check_round_trip(record);
  for (const auto& r : records_) {
    if (r.provenance_id == record.provenance_id) {
      throw ValidationError("duplicate provenance_id '" + record.provenance_id + "'");
    }
  }
  if (data_dir_) {
    std::ofstream out(*data_dir_ / (record.session_id + ".prov.jsonl"), std::ios::app);
    out << nlohmann::json(record).dump() << '\n';
    out.flush();
    if (!out) throw ValidationError("failed to write ledger for " + record.session_id);
  }
  records_.push_back(record);
}

std::vector<ProvenanceRecord> ProvenanceLedger::query(std::string_view session_id,
                                                      const ProvenanceFilter& filter) const {
  std::lock_guard lock(mutex_);
  std::vector<ProvenanceRecord> out;
  for (const auto& r : records_) {
    if (r.session_id != session_id) continue;
    if (r.aborted && !filter.include_aborted) continue;
    if (filter.origin && r.derived_origin != *filter.origin) continue;
    if (filter.condition && r.condition != *filter.condition) continue;
#ifndef NDEBUG
    check_round_trip(r);
#endif
    out.push_back(r);
  }
  return out;
}

std::size_t ProvenanceLedger::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<ProvenanceRecord> ProvenanceLedger::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ledger " + path.string());
  std::vector<ProvenanceRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<ProvenanceRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    check_round_trip(out.back());
  }
  return out;
}

}  // namespace proxyme
