#include "lloom/eval/harness.hpp"

#include <cmath>
#include <sstream>

#include "lloom/core/util.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/parse.hpp"

namespace lloom {

namespace {

std::optional<std::size_t> index_of(const std::string& id, std::size_t n) {
    const auto t = trim(id);
    std::size_t v = 0;
    if (t.empty() || t.size() > 9) return std::nullopt;
    for (const char c : t) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    if (v < 1 || v > n) return std::nullopt;
    return v - 1;
}

} // namespace

CoverageResult auto_coverage(EngineContext& ctx, std::span<const std::string> ground_truth,
                             std::span<const std::string> generated, EventLog& log) {
    if (ground_truth.empty()) throw PreconditionError("ground truth concept list is empty");
    if (generated.empty()) throw PreconditionError("generated concept list is empty");

    json gt = json::array(), gen = json::array();
    for (std::size_t i = 0; i < ground_truth.size(); ++i)
        gt.push_back({{"concept_id", std::to_string(i + 1)}, {"concept", ground_truth[i]}});
    for (std::size_t i = 0; i < generated.size(); ++i)
        gen.push_back({{"item_id", std::to_string(i + 1)}, {"text", generated[i]}});
    const TemplateParams params{{"ground_truth_concepts", gt.dump()}, {"generated_concepts", gen.dump()}};

    CoverageResult r;
    std::vector<ConceptMatch> raw;
    for (r.attempts = 1;; ++r.attempts) {
        const auto resp = call_llm(ctx, TemplateId::CoverageMatch, ModelTier::CoverageMatch, Stage::Eval, params, 0.0,
                                   {{"n_ground_truth", ground_truth.size()}, {"n_generated", generated.size()}}, log);
        try {
            raw = parse_concept_matches(resp.text);
            break;
        } catch (const ParseError& e) {
            log.push_back({"coverage_parse_failed", {{"attempt", r.attempts}, {"detail", e.what()}}});
            if (r.attempts == 2) throw;
        }
    }

    std::vector<std::vector<std::pair<std::size_t, std::string>>> proposals(ground_truth.size());
    auto warn = [&](std::string w) {
        log.push_back({"coverage_match_dropped", {{"reason", w}}});
        r.warnings.push_back(std::move(w));
    };
    for (const auto& m : raw) {
        const auto g = index_of(m.concept_id, ground_truth.size());
        if (!g) {
            warn("unknown concept_id '" + m.concept_id + "'");
            continue;
        }
        if (!m.item_id) continue;
        const auto item = index_of(*m.item_id, generated.size());
        if (!item) {
            warn("unknown item_id '" + *m.item_id + "' for concept " + m.concept_id);
            continue;
        }
        proposals[*g].emplace_back(*item, m.rationale);
    }

    std::vector<bool> used(generated.size(), false);
    std::size_t matched = 0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
        CoverageMatch cm{g, std::nullopt, ""};
        for (const auto& [item, why] : proposals[g]) {
            if (cm.generated) {
                warn("concept " + std::to_string(g + 1) + " matched more than once; kept item " +
                     std::to_string(*cm.generated + 1));
                continue;
            }
            if (used[item]) {
                warn("item " + std::to_string(item + 1) + " already matched; dropped for concept " +
                     std::to_string(g + 1));
                continue;
            }
            used[item] = true;
            cm.generated = item;
            cm.rationale = why;
        }
        if (cm.generated) ++matched;
        r.matches.push_back(std::move(cm));
    }
    r.coverage = static_cast<double>(matched) / static_cast<double>(ground_truth.size());
    return r;
}

TrialReport run_trials(EngineContext& ctx, const TrialInput& input, std::size_t n_trials, EventLog& log) {
    if (n_trials == 0) throw PreconditionError("n_trials must be at least 1");
    struct Out {
        TrialOutcome outcome;
        EventLog log;
    };
    auto outs = parallel_map(n_trials, ctx.workers, [&](std::size_t t) {
        Out o;
        o.outcome.trial = t + 1;
        if (t >= input.trials.size()) {
            o.outcome.error = "no method output for this trial";
            return o;
        }
        const auto& run = input.trials[t];
        if (run.error) {
            o.outcome.error = *run.error;
            return o;
        }
        try {
            o.outcome.coverage = auto_coverage(ctx, input.ground_truth, run.concepts, o.log).coverage;
        } catch (const std::exception& e) {
            o.outcome.error = e.what();
        }
        return o;
    });

    TrialReport rep{input.method, input.dataset, {}, 0, std::nullopt, std::nullopt, ""};
    double sum = 0;
    for (auto& o : outs) {
        for (auto& e : o.log) log.push_back(std::move(e));
        if (o.outcome.coverage) {
            ++rep.n_ok;
            sum += *o.outcome.coverage;
        }
        rep.trials.push_back(std::move(o.outcome));
    }
    if (rep.n_ok > 0) rep.mean = sum / static_cast<double>(rep.n_ok);
    if (rep.n_ok > 1) {
        double ss = 0;
        for (const auto& t : rep.trials)
            if (t.coverage) ss += (*t.coverage - *rep.mean) * (*t.coverage - *rep.mean);
        rep.sd = std::sqrt(ss / static_cast<double>(rep.n_ok - 1));
    }
    std::vector<std::string> notes;
    if (rep.n_ok < n_trials)
        notes.push_back(std::to_string(n_trials - rep.n_ok) + " of " + std::to_string(n_trials) +
                        " trials failed; aggregated over " + std::to_string(rep.n_ok));
    if (!rep.sd) notes.push_back("sd undefined");
    rep.note = join(notes, "; ");
    return rep;
}

std::string trials_csv(std::span<const TrialReport> reports) {
    std::ostringstream out;
    out << "method,dataset,row,coverage,note\r\n";
    auto row = [&](const TrialReport& r, const std::string& name, const std::optional<double>& v,
                   const std::string& note) {
        out << csv_escape(r.method) << ',' << csv_escape(r.dataset) << ',' << name << ','
            << (v ? format_number(*v) : "") << ',' << csv_escape(note) << "\r\n";
    };
    for (const auto& r : reports) {
        for (const auto& t : r.trials) row(r, std::to_string(t.trial), t.coverage, t.error);
        row(r, "mean", r.mean, r.note);
        row(r, "sd", r.sd, r.sd ? "" : "sd undefined (n=" + std::to_string(r.n_ok) + ")");
    }
    return out.str();
}

double manual_coverage(const std::vector<std::optional<std::size_t>>& matches) {
    if (matches.empty()) throw PreconditionError("manual match list is empty");
    std::size_t n = 0;
    for (const auto& m : matches) n += m ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(matches.size());
}

} // namespace lloom
