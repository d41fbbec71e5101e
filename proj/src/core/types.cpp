#include "lloom/core/types.hpp"

#include <algorithm>
#include <array>

#include "lloom/error.hpp"

namespace lloom {

namespace {

template <typename E, std::size_t N>
E lookup(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table,
         std::string_view what) {
    for (const auto& [value, name] : table)
        if (name == s) return value;
    throw ValidationError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(E v, const std::array<std::pair<E, std::string_view>, N>& table) {
    for (const auto& [value, name] : table)
        if (value == v) return name;
    return "?";
}

constexpr std::array<std::pair<ColumnType, std::string_view>, 3> kColumnTypes{{
    {ColumnType::String, "string"},
    {ColumnType::Number, "number"},
    {ColumnType::Boolean, "boolean"},
}};

constexpr std::array<std::pair<ConceptOrigin, std::string_view>, 4> kOrigins{{
    {ConceptOrigin::Synthesized, "synthesized"},
    {ConceptOrigin::UserAuthored, "user_authored"},
    {ConceptOrigin::Merged, "merged"},
    {ConceptOrigin::Split, "split"},
}};

constexpr std::array<std::pair<ModelTier, std::string_view>, 6> kTiers{{
    {ModelTier::Distill, "distill"},
    {ModelTier::Synthesize, "synthesize"},
    {ModelTier::Score, "score"},
    {ModelTier::Embed, "embed"},
    {ModelTier::GenerateSynthetic, "generate_synthetic"},
    {ModelTier::CoverageMatch, "coverage_match"},
}};

constexpr std::array<std::pair<Stage, std::string_view>, 3> kStages{{
    {Stage::Generation, "generation"},
    {Stage::Scoring, "scoring"},
    {Stage::Eval, "eval"},
}};

} // namespace

std::string_view to_string(ColumnType t) { return name_of(t, kColumnTypes); }
ColumnType column_type_from_string(std::string_view s) { return lookup(s, kColumnTypes, "column type"); }
std::string_view to_string(ConceptOrigin o) { return name_of(o, kOrigins); }
ConceptOrigin concept_origin_from_string(std::string_view s) { return lookup(s, kOrigins, "concept origin"); }
std::string_view to_string(ModelTier t) { return name_of(t, kTiers); }
ModelTier model_tier_from_string(std::string_view s) { return lookup(s, kTiers, "model tier"); }
std::string_view to_string(Stage s) { return name_of(s, kStages); }
Stage stage_from_string(std::string_view s) { return lookup(s, kStages, "stage"); }

std::string_view to_string(Answer a) {
    static constexpr std::array<std::string_view, 5> letters{"A", "B", "C", "D", "E"};
    return letters[static_cast<std::size_t>(a)];
}

std::optional<std::size_t> ScoreMatrix::column_index(std::string_view concept_id) const {
    const auto it = std::find(concept_ids.begin(), concept_ids.end(), concept_id);
    if (it == concept_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - concept_ids.begin());
}

const std::vector<ScoreEntry>* ScoreMatrix::column(std::string_view concept_id) const {
    const auto idx = column_index(concept_id);
    return idx ? &columns[*idx] : nullptr;
}

void ScoreMatrix::set_column(const std::string& concept_id, std::vector<ScoreEntry> entries) {
    if (const auto idx = column_index(concept_id)) {
        columns[*idx] = std::move(entries);
        return;
    }
    concept_ids.push_back(concept_id);
    columns.push_back(std::move(entries));
}

const Document* Session::find_document(std::string_view doc_id) const {
    const auto it = std::find_if(documents.begin(), documents.end(),
                                 [&](const Document& d) { return d.id == doc_id; });
    return it == documents.end() ? nullptr : &*it;
}

const Concept* Session::find_concept(std::string_view concept_id) const {
    const auto it = std::find_if(concepts.begin(), concepts.end(),
                                 [&](const Concept& c) { return c.id == concept_id; });
    return it == concepts.end() ? nullptr : &*it;
}

Concept* Session::find_concept(std::string_view concept_id) {
    const auto it = std::find_if(concepts.begin(), concepts.end(),
                                 [&](const Concept& c) { return c.id == concept_id; });
    return it == concepts.end() ? nullptr : &*it;
}

const Bullet* Session::find_bullet(std::string_view bullet_id) const {
    const auto it = std::find_if(bullets.begin(), bullets.end(),
                                 [&](const Bullet& b) { return b.id == bullet_id; });
    return it == bullets.end() ? nullptr : &*it;
}

std::vector<const Concept*> Session::active_concepts() const {
    std::vector<const Concept*> out;
    for (const auto& c : concepts)
        if (c.active) out.push_back(&c);
    return out;
}

} // namespace lloom
