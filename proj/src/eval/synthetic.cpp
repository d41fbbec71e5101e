#include "lloom/eval/synthetic.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include "lloom/core/util.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/parse.hpp"

namespace lloom {

namespace {

const std::array<std::string_view, 22> kAbbreviations = {
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "e.g.", "i.e.",
    "u.s.", "u.k.", "u.n.", "inc.", "ltd.", "co.", "no.", "gov.", "sen.", "rep.", "approx."};

bool is_abbreviation(std::string_view text, std::size_t period) {
    std::size_t start = period;
    while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) --start;
    std::string word;
    for (std::size_t i = start; i <= period; ++i) {
        const char c = text[i];
        if (c == '(' || c == '"' || c == '\'') continue;
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (word.size() == 2 && std::isalpha(static_cast<unsigned char>(word[0]))) return true; // initials
    for (const auto a : kAbbreviations)
        if (word == a) return true;
    return false;
}

bool closer(char c) { return c == '"' || c == '\'' || c == ')'; }

} // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    auto emit = [&](std::size_t end) {
        auto s = trim(text.substr(begin, end - begin));
        if (!s.empty()) out.emplace_back(s);
        begin = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
        while (j < text.size() && closer(text[j])) ++j;
        if (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) continue;
        if (c == '.' && j == i + 1 && is_abbreviation(text, i)) continue;
        emit(j);
        i = j - 1;
    }
    emit(text.size());
    return out;
}

void validate(const SyntheticSpec& spec) {
    if (spec.doc_length != 5 && spec.doc_length != 10)
        throw ValidationError("doc_length must be 5 or 10, got " + std::to_string(spec.doc_length));
    if (std::abs(spec.concept_prevalence - 0.2) > 1e-9 && std::abs(spec.concept_prevalence - 0.4) > 1e-9)
        throw ValidationError("concept_prevalence must be 0.2 or 0.4, got " + format_number(spec.concept_prevalence));
    if (trim(spec.seed_concept).empty()) throw ValidationError("seed concept must not be empty");
    const double n = spec.concept_prevalence * static_cast<double>(spec.doc_length);
    if (std::abs(n - std::round(n)) > 1e-9)
        throw ValidationError("concept_prevalence x doc_length must be a whole number of sentences");
}

std::size_t seed_sentence_count(const SyntheticSpec& spec) {
    validate(spec);
    return static_cast<std::size_t>(std::lround(spec.concept_prevalence * static_cast<double>(spec.doc_length)));
}

Verification verify_synthetic(const SyntheticDoc& doc, const SyntheticSpec& spec) {
    Verification v;
    v.n_sentences = split_sentences(doc.paragraph).size();
    if (v.n_sentences != spec.doc_length) v.reasons.push_back("sentence-count");

    std::vector<std::string> seeds;
    for (const auto& s : doc.seed_sentences)
        for (auto& part : split_sentences(s)) seeds.push_back(std::move(part));
    if (seeds.size() != seed_sentence_count(spec)) v.reasons.push_back("seed-count");
    for (const auto& s : seeds)
        if (doc.paragraph.find(s) == std::string::npos) {
            v.reasons.push_back("seed-not-verbatim");
            break;
        }
    v.pass = v.reasons.empty();
    return v;
}

GeneratedDoc generate_synthetic_doc(EngineContext& ctx, const SyntheticSpec& spec, std::size_t max_attempts,
                                    double temperature, EventLog& log) {
    const auto n_seed = seed_sentence_count(spec);
    if (max_attempts == 0) throw PreconditionError("max_attempts must be at least 1");
    TemplateParams params;
    params["doc_length"] = std::to_string(spec.doc_length);
    params["n_seed_sentences"] = std::to_string(n_seed);
    params["low_level_concept"] = spec.seed_concept;
    const json item{{"seed_concept", spec.seed_concept},
                    {"doc_length", spec.doc_length},
                    {"concept_prevalence", spec.concept_prevalence}};

    for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
        const auto resp = call_llm(ctx, TemplateId::SyntheticGen, ModelTier::GenerateSynthetic, Stage::Eval, params,
                                   temperature, item, log);
        SyntheticDoc doc;
        try {
            const auto p = parse_paragraph(resp.text);
            doc.paragraph = p.paragraph;
            doc.seed_sentences = p.seed_topic_sentences;
        } catch (const ParseError& e) {
            log.push_back({"synthetic_rejected", {{"attempt", attempt}, {"reasons", {"parse"}}, {"detail", e.what()}}});
            continue;
        }
        const auto v = verify_synthetic(doc, spec);
        if (v.pass) return {std::move(doc), attempt};
        log.push_back({"synthetic_rejected",
                       {{"attempt", attempt}, {"reasons", v.reasons}, {"n_sentences", v.n_sentences}}});
    }
    throw PipelineError("no verified paragraph for '" + spec.seed_concept + "' after " + std::to_string(max_attempts) +
                        " attempts");
}

const ConceptHierarchy& concept_hierarchy() {
    static const ConceptHierarchy h = {
        {"Election Campaigns", {"Fundraising", "Candidate Profiles", "Political Rallies", "Campaign Promises"}},
        {"Government Policies",
         {"Healthcare Policies", "Education Policies", "International Relations Policies", "Economic Policies"}},
        {"Political Parties", {"Party Platforms", "Party Leadership", "Party History", "Party Factionalism"}},
        {"Human Rights", {"LGBTQ+ Rights", "Women's Rights", "Racial Equality", "Children's Rights"}},
        {"Immigration", {"Border Control Policies", "Refugee Policies", "Immigration Reform", "Illegal Immigration"}},
        {"Economy", {"Taxes", "Unemployment", "Fiscal Policy", "Government Spending"}},
        {"Healthcare", {"Universal Healthcare", "Mental Health", "Drug Policy", "Health Insurance"}},
        {"Environment", {"Climate Change", "Renewable Energy", "Nature Conservation", "Air Pollution"}},
        {"Foreign Policy", {"Trade Agreements", "War and Peace", "Diplomatic Relations", "International Aid"}},
        {"Gun Control",
         {"Background Checks", "Assault Weapons Ban", "Gun Control Legislation", "Second Amendment Rights"}},
    };
    return h;
}

json to_json(const ConceptHierarchy& h) {
    json out = json::array();
    for (const auto& g : h) out.push_back({{"generic", g.name}, {"specific", g.specifics}});
    return out;
}

ConceptHierarchy concept_hierarchy_from_json(const json& j) {
    if (!j.is_array()) throw ValidationError("concept hierarchy must be an array");
    ConceptHierarchy h;
    std::set<std::string> seen;
    for (const auto& g : j) {
        if (!g.is_object() || !g.contains("generic") || !g["generic"].is_string() || !g.contains("specific") ||
            !g["specific"].is_array())
            throw ValidationError("hierarchy entries need 'generic' (string) and 'specific' (array)");
        GenericConcept gc{g["generic"].get<std::string>(), {}};
        for (const auto& s : g["specific"]) {
            if (!s.is_string()) throw ValidationError("specific concepts must be strings");
            const auto name = s.get<std::string>();
            if (!seen.insert(name).second) throw ValidationError("specific concept '" + name + "' listed twice");
            gc.specifics.push_back(name);
        }
        h.push_back(std::move(gc));
    }
    return h;
}

std::string generic_of(const ConceptHierarchy& h, std::string_view specific) {
    for (const auto& g : h)
        for (const auto& s : g.specifics)
            if (s == specific) return g.name;
    return "";
}

} // namespace lloom
