#include "lloom/core/session_io.hpp"

#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "lloom/error.hpp"

namespace lloom {

namespace {

// Thrown internally by decoders; converted to DecodeError with a byte offset
// once the failing JSON pointer is known.
struct FieldError {
    std::string path;
    std::string message;
};

std::string child(const std::string& path, std::string_view key) {
    return path + "/" + std::string(key);
}

std::string child(const std::string& path, std::size_t index) {
    return path + "/" + std::to_string(index);
}

const json& field(const json& j, std::string_view key, const std::string& path) {
    if (!j.is_object()) throw FieldError{path, "expected object"};
    const auto it = j.find(key);
    if (it == j.end()) throw FieldError{child(path, key), "missing required field"};
    return *it;
}

std::string get_string(const json& j, std::string_view key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_string()) throw FieldError{child(path, key), "expected string"};
    return v.get<std::string>();
}

double get_number(const json& j, std::string_view key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_number()) throw FieldError{child(path, key), "expected number"};
    return v.get<double>();
}

std::int64_t get_int(const json& j, std::string_view key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_number_integer()) throw FieldError{child(path, key), "expected integer"};
    return v.get<std::int64_t>();
}

std::uint64_t get_uint(const json& j, std::string_view key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw FieldError{child(path, key), "expected non-negative integer"};
    return v.get<std::uint64_t>();
}

bool get_bool(const json& j, std::string_view key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_boolean()) throw FieldError{child(path, key), "expected boolean"};
    return v.get<bool>();
}

const json& get_array(const json& j, std::string_view key, const std::string& path) {
    const auto& v = field(j, key, path);
    if (!v.is_array()) throw FieldError{child(path, key), "expected array"};
    return v;
}

std::vector<std::string> get_strings(const json& j, std::string_view key, const std::string& path) {
    const auto& arr = get_array(j, key, path);
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) throw FieldError{child(child(path, key), i), "expected string"};
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

bool present(const json& j, std::string_view key) {
    const auto it = j.find(key);
    return it != j.end() && !it->is_null();
}

std::optional<std::string> opt_string(const json& j, std::string_view key, const std::string& path) {
    if (!present(j, key)) return std::nullopt;
    return get_string(j, key, path);
}

std::optional<std::size_t> opt_size(const json& j, std::string_view key, const std::string& path) {
    if (!present(j, key)) return std::nullopt;
    return static_cast<std::size_t>(get_uint(j, key, path));
}

template <typename T, typename F>
std::vector<T> get_list(const json& j, std::string_view key, const std::string& path, F decode) {
    const auto& arr = get_array(j, key, path);
    std::vector<T> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(decode(arr[i], child(child(path, key), i)));
    return out;
}

template <typename E, typename F>
E get_enum(const json& j, std::string_view key, const std::string& path, F parse) {
    const auto s = get_string(j, key, path);
    try {
        return parse(s);
    } catch (const ValidationError& e) {
        throw FieldError{child(path, key), e.what()};
    }
}

json opt_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json opt_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

Answer answer_from_letter(const std::string& s) {
    if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'E') return static_cast<Answer>(s[0] - 'A');
    throw ValidationError("invalid answer letter '" + s + "'");
}

// --- byte-offset locator -------------------------------------------------

// Iterator over a char buffer that publishes how far the parser has read.
class CountingIterator {
public:
    using iterator_category = std::input_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    CountingIterator() = default;
    CountingIterator(const char* p, std::size_t* consumed) : p_(p), consumed_(consumed) {}

    reference operator*() const { return *p_; }
    CountingIterator& operator++() {
        ++p_;
        if (consumed_) ++*consumed_;
        return *this;
    }
    CountingIterator operator++(int) {
        auto tmp = *this;
        ++*this;
        return tmp;
    }
    bool operator==(const CountingIterator& o) const { return p_ == o.p_; }
    bool operator!=(const CountingIterator& o) const { return p_ != o.p_; }

private:
    const char* p_ = nullptr;
    std::size_t* consumed_ = nullptr;
};

// SAX handler that finds where the value at `target` (or its deepest existing
// ancestor) begins.
class Locator : public nlohmann::json_sax<json> {
public:
    Locator(std::string target, const std::size_t* consumed) : target_(std::move(target)), consumed_(consumed) {}

    std::size_t offset() const { return best_offset_; }

    bool null() override { return value(); }
    bool boolean(bool) override { return value(); }
    bool number_integer(number_integer_t) override { return value(); }
    bool number_unsigned(number_unsigned_t) override { return value(); }
    bool number_float(number_float_t, const string_t&) override { return value(); }
    bool string(string_t&) override { return value(); }
    bool binary(binary_t&) override { return value(); }
    bool start_object(std::size_t) override {
        value();
        stack_.push_back({true, "", 0});
        return true;
    }
    bool key(string_t& k) override {
        stack_.back().key = k;
        return true;
    }
    bool end_object() override {
        stack_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override {
        value();
        stack_.push_back({false, "", 0});
        return true;
    }
    bool end_array() override {
        stack_.pop_back();
        return true;
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

private:
    struct Frame {
        bool object;
        std::string key;
        std::size_t index;
    };

    bool value() {
        std::string path;
        for (auto& f : stack_) path += "/" + (f.object ? f.key : std::to_string(f.index));
        if (!stack_.empty() && !stack_.back().object) ++stack_.back().index;
        if ((target_ == path || target_.rfind(path + "/", 0) == 0 || path.empty()) &&
            path.size() >= best_len_) {
            best_len_ = path.size();
            best_offset_ = *consumed_;
        }
        return true;
    }

    std::string target_;
    const std::size_t* consumed_;
    std::vector<Frame> stack_;
    std::size_t best_len_ = 0;
    std::size_t best_offset_ = 0;
};

std::size_t locate(std::string_view bytes, const std::string& pointer) {
    std::size_t consumed = 0;
    Locator loc(pointer, &consumed);
    CountingIterator first(bytes.data(), &consumed);
    CountingIterator last(bytes.data() + bytes.size(), nullptr);
    json::sax_parse(first, last, &loc);
    return loc.offset();
}

Session decode_session(const json& j) {
    const std::string root;
    const auto version = get_string(j, "schema_version", root);
    if (version != kSessionSchema)
        throw VersionError("unsupported session schema version '" + version + "' (expected '" +
                           std::string(kSessionSchema) + "')");
    Session s;
    s.schema_version = version;
    s.id = get_string(j, "id", root);
    s.config = session_config_from_json(field(j, "config", root), "/config");
    const auto& cols = field(j, "columns", root);
    if (!cols.is_object()) throw FieldError{"/columns", "expected object"};
    for (const auto& [name, type] : cols.items()) {
        if (!type.is_string()) throw FieldError{"/columns/" + name, "expected string"};
        try {
            s.columns[name] = column_type_from_string(type.get<std::string>());
        } catch (const ValidationError& e) {
            throw FieldError{"/columns/" + name, e.what()};
        }
    }
    s.documents = get_list<Document>(j, "documents", root, document_from_json);
    s.quotes = get_list<Quote>(j, "quotes", root, quote_from_json);
    s.bullets = get_list<Bullet>(j, "bullets", root, bullet_from_json);
    s.clusterings = get_list<ClusterRun>(j, "clusterings", root, cluster_run_from_json);
    s.concepts = get_list<Concept>(j, "concepts", root, concept_from_json);
    s.matrix = score_matrix_from_json(field(j, "matrix", root), "/matrix");
    s.slices = get_list<Slice>(j, "slices", root, slice_from_json);
    s.usage = get_list<UsageRecord>(j, "usage", root, usage_record_from_json);
    s.trace = get_list<TraceEntry>(j, "trace", root, trace_entry_from_json);
    return s;
}

template <typename F>
auto translate(F&& f) {
    try {
        return f();
    } catch (const FieldError& e) {
        throw DecodeError(e.message, 0, e.path);
    }
}

} // namespace

// --- encoders ------------------------------------------------------------

json scalar_to_json(const Scalar& s) {
    return std::visit([](const auto& v) { return json(v); }, s);
}

json to_json(const Document& d) {
    json meta = json::object();
    for (const auto& [k, v] : d.metadata) meta[k] = scalar_to_json(v);
    return {{"id", d.id}, {"text", d.text}, {"metadata", std::move(meta)}};
}

json to_json(const Quote& q) { return {{"doc_id", q.doc_id}, {"text", q.text}}; }

json to_json(const Bullet& b) {
    return {{"id", b.id}, {"doc_id", b.doc_id}, {"text", b.text}, {"iteration", b.iteration}};
}

json to_json(const ClusterRun& r) {
    json arr = json::array();
    for (const auto& a : r.assignments)
        arr.push_back({{"bullet_id", a.bullet_id}, {"cluster_id", a.cluster_id}, {"membership", a.membership}});
    return {{"iteration", r.iteration}, {"min_cluster_size", r.min_cluster_size}, {"assignments", std::move(arr)}};
}

json to_json(const Concept& c) {
    return {{"id", c.id},
            {"name", c.name},
            {"criteria_prompt", c.criteria_prompt},
            {"representative_example_ids", c.representative_example_ids},
            {"representative_doc_ids", c.representative_doc_ids},
            {"subconcept_ids", c.subconcept_ids},
            {"generation", c.generation},
            {"origin", to_string(c.origin)},
            {"active", c.active},
            {"generic", c.generic},
            {"source_cluster", c.source_cluster ? json(*c.source_cluster) : json(nullptr)}};
}

json to_json(const ScoreEntry& e) {
    return {{"doc_id", e.doc_id},   {"concept_id", e.concept_id}, {"answer", to_string(e.answer)},
            {"score", e.score},     {"rationale", e.rationale},   {"label", e.label},
            {"error", opt_json(e.error)}};
}

json to_json(const ScoreMatrix& m) {
    json cols = json::array();
    for (const auto& col : m.columns) {
        json c = json::array();
        for (const auto& e : col) c.push_back(to_json(e));
        cols.push_back(std::move(c));
    }
    return {{"doc_ids", m.doc_ids}, {"concept_ids", m.concept_ids}, {"columns", std::move(cols)}};
}

json to_json(const Slice& s) { return {{"name", s.name}, {"predicate", s.predicate}}; }

json to_json(const SessionConfig& c) {
    return {{"sample_size", c.sample_size},
            {"max_concepts", c.max_concepts},
            {"n_quotes", opt_json(c.n_quotes)},
            {"n_bullets", c.n_bullets},
            {"n_words", c.n_words},
            {"n_name_words", c.n_name_words},
            {"n_example_ids", c.n_example_ids},
            {"n_concepts_per_cluster", opt_json(c.n_concepts_per_cluster)},
            {"seed_term", opt_json(c.seed_term)},
            {"score_threshold", c.score_threshold},
            {"generic_fraction", c.generic_fraction},
            {"min_cluster_size", opt_json(c.min_cluster_size)},
            {"min_samples", opt_json(c.min_samples)},
            {"score_batch_size", c.score_batch_size},
            {"filter_min_chars", c.filter_min_chars},
            {"n_loops", c.n_loops},
            {"rng_seed", c.rng_seed},
            {"temperature", c.temperature}};
}

json to_json(const UsageRecord& u) {
    return {{"tier", to_string(u.tier)},          {"stage", to_string(u.stage)},
            {"model", u.model},                   {"input_tokens", u.input_tokens},
            {"output_tokens", u.output_tokens},   {"cost", u.cost},
            {"wall_time_s", u.wall_time_s}};
}

json to_json(const TraceEntry& t) {
    return {{"seq", t.seq}, {"timestamp", t.timestamp}, {"kind", t.kind}, {"data", t.data}};
}

json to_json(const Session& s) {
    json j;
    j["schema_version"] = s.schema_version;
    j["id"] = s.id;
    j["config"] = to_json(s.config);
    json cols = json::object();
    for (const auto& [k, v] : s.columns) cols[k] = to_string(v);
    j["columns"] = std::move(cols);
    auto list = [](const auto& items) {
        json arr = json::array();
        for (const auto& x : items) arr.push_back(to_json(x));
        return arr;
    };
    j["documents"] = list(s.documents);
    j["quotes"] = list(s.quotes);
    j["bullets"] = list(s.bullets);
    j["clusterings"] = list(s.clusterings);
    j["concepts"] = list(s.concepts);
    j["matrix"] = to_json(s.matrix);
    j["slices"] = list(s.slices);
    j["usage"] = list(s.usage);
    j["trace"] = list(s.trace);
    return j;
}

// --- decoders ------------------------------------------------------------

namespace {

Document decode_document(const json& j, const std::string& path) {
    Document d;
    d.id = get_string(j, "id", path);
    d.text = get_string(j, "text", path);
    const auto& meta = field(j, "metadata", path);
    if (!meta.is_object()) throw FieldError{child(path, "metadata"), "expected object"};
    for (const auto& [k, v] : meta.items()) {
        const auto p = child(child(path, "metadata"), k);
        if (v.is_string()) d.metadata[k] = v.get<std::string>();
        else if (v.is_boolean()) d.metadata[k] = v.get<bool>();
        else if (v.is_number()) d.metadata[k] = v.get<double>();
        else throw FieldError{p, "metadata values must be string, number or boolean"};
    }
    return d;
}

Concept decode_concept(const json& j, const std::string& path) {
    Concept c;
    c.id = get_string(j, "id", path);
    c.name = get_string(j, "name", path);
    c.criteria_prompt = get_string(j, "criteria_prompt", path);
    c.representative_example_ids = get_strings(j, "representative_example_ids", path);
    c.representative_doc_ids = get_strings(j, "representative_doc_ids", path);
    c.subconcept_ids = get_strings(j, "subconcept_ids", path);
    c.generation = static_cast<int>(get_int(j, "generation", path));
    c.origin = get_enum<ConceptOrigin>(j, "origin", path, concept_origin_from_string);
    c.active = get_bool(j, "active", path);
    c.generic = get_bool(j, "generic", path);
    if (present(j, "source_cluster")) c.source_cluster = static_cast<int>(get_int(j, "source_cluster", path));
    return c;
}

ScoreEntry decode_entry(const json& j, const std::string& path) {
    ScoreEntry e;
    e.doc_id = get_string(j, "doc_id", path);
    e.concept_id = get_string(j, "concept_id", path);
    e.answer = get_enum<Answer>(j, "answer", path, answer_from_letter);
    e.score = get_number(j, "score", path);
    e.rationale = get_string(j, "rationale", path);
    e.label = get_bool(j, "label", path);
    e.error = opt_string(j, "error", path);
    return e;
}

ScoreMatrix decode_matrix(const json& j, const std::string& path) {
    ScoreMatrix m;
    m.doc_ids = get_strings(j, "doc_ids", path);
    m.concept_ids = get_strings(j, "concept_ids", path);
    const auto& cols = get_array(j, "columns", path);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto cpath = child(child(path, "columns"), c);
        if (!cols[c].is_array()) throw FieldError{cpath, "expected array"};
        std::vector<ScoreEntry> col;
        for (std::size_t r = 0; r < cols[c].size(); ++r) col.push_back(decode_entry(cols[c][r], child(cpath, r)));
        m.columns.push_back(std::move(col));
    }
    if (m.columns.size() != m.concept_ids.size())
        throw FieldError{child(path, "columns"), "column count does not match concept_ids"};
    return m;
}

SessionConfig decode_config(const json& j, const std::string& path) {
    SessionConfig c;
    c.sample_size = get_uint(j, "sample_size", path);
    c.max_concepts = get_uint(j, "max_concepts", path);
    c.n_quotes = opt_string(j, "n_quotes", path);
    c.n_bullets = get_string(j, "n_bullets", path);
    c.n_words = get_string(j, "n_words", path);
    c.n_name_words = get_string(j, "n_name_words", path);
    c.n_example_ids = get_string(j, "n_example_ids", path);
    c.n_concepts_per_cluster = opt_size(j, "n_concepts_per_cluster", path);
    c.seed_term = opt_string(j, "seed_term", path);
    c.score_threshold = get_number(j, "score_threshold", path);
    c.generic_fraction = get_number(j, "generic_fraction", path);
    c.min_cluster_size = opt_size(j, "min_cluster_size", path);
    c.min_samples = opt_size(j, "min_samples", path);
    c.score_batch_size = get_uint(j, "score_batch_size", path);
    c.filter_min_chars = get_uint(j, "filter_min_chars", path);
    c.n_loops = get_uint(j, "n_loops", path);
    c.rng_seed = get_uint(j, "rng_seed", path);
    c.temperature = get_number(j, "temperature", path);
    return c;
}

UsageRecord decode_usage(const json& j, const std::string& path) {
    UsageRecord u;
    u.tier = get_enum<ModelTier>(j, "tier", path, model_tier_from_string);
    u.stage = get_enum<Stage>(j, "stage", path, stage_from_string);
    u.model = get_string(j, "model", path);
    u.input_tokens = get_uint(j, "input_tokens", path);
    u.output_tokens = get_uint(j, "output_tokens", path);
    u.cost = get_number(j, "cost", path);
    u.wall_time_s = get_number(j, "wall_time_s", path);
    return u;
}

TraceEntry decode_trace(const json& j, const std::string& path) {
    TraceEntry t;
    t.seq = get_uint(j, "seq", path);
    t.timestamp = get_string(j, "timestamp", path);
    t.kind = get_string(j, "kind", path);
    t.data = field(j, "data", path);
    return t;
}

ClusterRun decode_cluster_run(const json& j, const std::string& path) {
    ClusterRun r;
    r.iteration = static_cast<int>(get_int(j, "iteration", path));
    r.min_cluster_size = get_uint(j, "min_cluster_size", path);
    const auto& arr = get_array(j, "assignments", path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto p = child(child(path, "assignments"), i);
        ClusterAssignment a;
        a.bullet_id = get_string(arr[i], "bullet_id", p);
        a.cluster_id = static_cast<int>(get_int(arr[i], "cluster_id", p));
        a.membership = get_number(arr[i], "membership", p);
        r.assignments.push_back(std::move(a));
    }
    return r;
}

} // namespace

Document document_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_document(j, path); });
}
Quote quote_from_json(const json& j, const std::string& path) {
    return translate([&] { return Quote{get_string(j, "doc_id", path), get_string(j, "text", path)}; });
}
Bullet bullet_from_json(const json& j, const std::string& path) {
    return translate([&] {
        return Bullet{get_string(j, "id", path), get_string(j, "doc_id", path), get_string(j, "text", path),
                      static_cast<int>(get_int(j, "iteration", path))};
    });
}
ClusterRun cluster_run_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_cluster_run(j, path); });
}
Concept concept_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_concept(j, path); });
}
ScoreEntry score_entry_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_entry(j, path); });
}
ScoreMatrix score_matrix_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_matrix(j, path); });
}
Slice slice_from_json(const json& j, const std::string& path) {
    return translate([&] { return Slice{get_string(j, "name", path), get_string(j, "predicate", path)}; });
}
SessionConfig session_config_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_config(j, path); });
}
UsageRecord usage_record_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_usage(j, path); });
}
TraceEntry trace_entry_from_json(const json& j, const std::string& path) {
    return translate([&] { return decode_trace(j, path); });
}
Session session_from_json(const json& j) {
    return translate([&] { return decode_session(j); });
}

std::string save_session(const Session& s) { return to_json(s).dump(2) + "\n"; }

void save_session(const Session& s, const std::filesystem::path& destination) {
    const auto tmp = destination.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write session file " + tmp);
        out << save_session(s);
        if (!out) throw Error("failed writing session file " + tmp);
    }
    std::filesystem::rename(tmp, destination);
}

Session load_session(std::string_view bytes) {
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw DecodeError(std::string("malformed session JSON: ") + e.what(), e.byte, "<document>");
    }
    try {
        // Peek at the version first so an old/new file reports a version error
        // rather than a field error.
        if (j.is_object() && j.contains("schema_version") && j["schema_version"].is_string() &&
            j["schema_version"].get<std::string>() != kSessionSchema)
            throw VersionError("unsupported session schema version '" + j["schema_version"].get<std::string>() +
                               "' (expected '" + std::string(kSessionSchema) + "')");
        return decode_session(j);
    } catch (const FieldError& e) {
        throw DecodeError(e.message, locate(bytes, e.path), e.path);
    }
}

Session load_session_file(const std::filesystem::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw NotFoundError("cannot open session file " + source.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_session(ss.str());
}

} // namespace lloom
