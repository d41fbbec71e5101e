#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/core/util.hpp"

namespace lloom {

/// Rows as read from disk. CSV cells are strings; JSON-lines cells keep their
/// JSON type.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::map<std::string, json>> rows;
};

/// RFC-4180 records (quoted fields, doubled quotes, CRLF or LF).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// First record is the header.
RawTable read_csv(std::string_view text);
/// One JSON object per non-blank line.
RawTable read_jsonl(std::string_view text);
/// Picks the reader by extension (.jsonl / .ndjson, otherwise CSV).
RawTable read_dataset_file(const std::filesystem::path& path);

struct IngestOptions {
    std::string text_col = "text";
    /// Row index (0-based) when absent.
    std::optional<std::string> id_col;
};

struct RejectedRow {
    std::size_t row = 0;
    std::string reason;
};

struct IngestReport {
    std::size_t total = 0;
    std::size_t accepted = 0;
    std::vector<RejectedRow> rejected;
};

struct IngestResult {
    std::vector<Document> documents;
    std::map<std::string, ColumnType> columns;
    IngestReport report;
};

/// Builds documents and infers metadata column types. Bad rows are reported,
/// not fatal; a missing column or zero usable rows throws DataError.
IngestResult ingest(const RawTable& table, const IngestOptions& options);

json to_json(const IngestReport& r);

/// A fresh session whose trace starts with session_created.
Session make_session(std::string id, IngestResult data, const SessionConfig& config, const Clock& clock);

} // namespace lloom
