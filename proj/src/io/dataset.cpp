#include "lloom/io/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "lloom/core/events.hpp"
#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"

namespace lloom {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read dataset file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool(std::string_view s) {
    std::string l(trim(s));
    for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "true") return true;
    if (l == "false") return false;
    return std::nullopt;
}

std::string cell_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

bool is_missing(const json& v) { return v.is_null() || (v.is_string() && trim(v.get_ref<const std::string&>()).empty()); }

ColumnType infer(const std::vector<const json*>& values) {
    bool all_num = !values.empty(), all_bool = !values.empty();
    for (const auto* v : values) {
        if (v->is_string()) {
            all_num = all_num && parse_number(v->get_ref<const std::string&>()).has_value();
            all_bool = all_bool && parse_bool(v->get_ref<const std::string&>()).has_value();
        } else {
            all_num = all_num && v->is_number();
            all_bool = all_bool && v->is_boolean();
        }
    }
    if (all_bool) return ColumnType::Boolean;
    if (all_num) return ColumnType::Number;
    return ColumnType::String;
}

Scalar convert(const json& v, ColumnType t) {
    switch (t) {
    case ColumnType::Number: return v.is_number() ? v.get<double>() : *parse_number(v.get<std::string>());
    case ColumnType::Boolean: return v.is_boolean() ? v.get<bool>() : *parse_bool(v.get<std::string>());
    case ColumnType::String: break;
    }
    return cell_text(v);
}

} // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, field_started = false;
    std::size_t line = 1;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            continue;
        } else if (c == '\n') {
            end_record();
            ++line;
        } else {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw DataError("unterminated quoted field at line " + std::to_string(line));
    if (field_started || !record.empty()) end_record();
    return records;
}

RawTable read_csv(std::string_view text) {
    auto records = parse_csv(text);
    if (records.empty()) throw DataError("dataset is empty");
    RawTable t;
    t.columns = records.front();
    for (auto& c : t.columns) c = std::string(trim(c));
    std::set<std::string> seen;
    for (const auto& c : t.columns)
        if (!seen.insert(c).second) throw DataError("duplicate column '" + c + "' in CSV header");
    for (std::size_t r = 1; r < records.size(); ++r) {
        std::map<std::string, json> row;
        const auto& rec = records[r];
        for (std::size_t c = 0; c < t.columns.size(); ++c) row[t.columns[c]] = c < rec.size() ? json(rec[c]) : json();
        if (rec.size() > t.columns.size()) row["\x01overflow"] = static_cast<int>(rec.size());
        t.rows.push_back(std::move(row));
    }
    return t;
}

RawTable read_jsonl(std::string_view text) {
    RawTable t;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = trim(text.substr(pos, nl - pos));
        ++lineno;
        pos = nl + 1;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("invalid JSON on line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object()) throw DataError("line " + std::to_string(lineno) + " is not a JSON object");
        std::map<std::string, json> row;
        for (auto& [k, v] : j.items()) {
            if (seen.insert(k).second) t.columns.push_back(k);
            row[k] = v;
        }
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) throw DataError("dataset is empty");
    return t;
}

RawTable read_dataset_file(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    const auto text = read_file(path);
    if (ext == ".jsonl" || ext == ".ndjson") return read_jsonl(text);
    return read_csv(text);
}

IngestResult ingest(const RawTable& table, const IngestOptions& options) {
    auto has = [&](const std::string& c) {
        return std::find(table.columns.begin(), table.columns.end(), c) != table.columns.end();
    };
    const auto available = join(table.columns, ", ");
    if (!has(options.text_col))
        throw DataError("text column '" + options.text_col + "' not found; available columns: " + available);
    if (options.id_col && !has(*options.id_col))
        throw DataError("id column '" + *options.id_col + "' not found; available columns: " + available);

    std::vector<std::string> meta_cols;
    for (const auto& c : table.columns)
        if (c != options.text_col && (!options.id_col || c != *options.id_col)) meta_cols.push_back(c);

    IngestResult out;
    out.report.total = table.rows.size();
    std::vector<std::size_t> accepted_rows;
    std::set<std::string> ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        auto reject = [&](std::string why) { out.report.rejected.push_back({r, std::move(why)}); };
        if (row.count("\x01overflow")) {
            reject("more fields than header columns");
            continue;
        }
        const auto t = row.find(options.text_col);
        if (t == row.end() || t->second.is_null() || !t->second.is_string()) {
            reject(t == row.end() || t->second.is_null() ? "missing text" : "text is not a string");
            continue;
        }
        if (trim(t->second.get_ref<const std::string&>()).empty()) {
            reject("empty text");
            continue;
        }
        std::string id = std::to_string(r);
        if (options.id_col) {
            const auto it = row.find(*options.id_col);
            if (it == row.end() || is_missing(it->second) || it->second.is_structured()) {
                reject("missing id");
                continue;
            }
            id = std::string(trim(cell_text(it->second)));
        }
        if (ids.count(id)) {
            reject("duplicate id '" + id + "'");
            continue;
        }
        std::string nested;
        for (const auto& c : meta_cols) {
            const auto it = row.find(c);
            if (it != row.end() && it->second.is_structured()) nested = c;
        }
        if (!nested.empty()) {
            reject("nested value in column '" + nested + "'");
            continue;
        }
        ids.insert(id);
        out.documents.push_back({id, t->second.get<std::string>(), {}});
        accepted_rows.push_back(r);
    }
    if (out.documents.empty()) throw DataError("no usable rows in dataset (" + std::to_string(out.report.total) + " rejected)");
    out.report.accepted = out.documents.size();

    for (const auto& c : meta_cols) {
        std::vector<const json*> values;
        for (const auto r : accepted_rows) {
            const auto it = table.rows[r].find(c);
            if (it != table.rows[r].end() && !is_missing(it->second)) values.push_back(&it->second);
        }
        const auto type = infer(values);
        out.columns[c] = type;
        for (std::size_t i = 0; i < accepted_rows.size(); ++i) {
            const auto it = table.rows[accepted_rows[i]].find(c);
            if (it == table.rows[accepted_rows[i]].end() || is_missing(it->second)) continue;
            out.documents[i].metadata[c] = convert(it->second, type);
        }
    }
    return out;
}

json to_json(const IngestReport& r) {
    json rejected = json::array();
    for (const auto& x : r.rejected) rejected.push_back({{"row", x.row}, {"reason", x.reason}});
    return {{"total", r.total}, {"accepted", r.accepted}, {"rejected", rejected}};
}

Session make_session(std::string id, IngestResult data, const SessionConfig& config, const Clock& clock) {
    Session s;
    s.id = std::move(id);
    s.documents = std::move(data.documents);
    s.columns = std::move(data.columns);
    commit(s, clock, Event{event_kind::kSessionCreated, {{"config", to_json(config)}, {"ingest", to_json(data.report)}}});
    return s;
}

} // namespace lloom
