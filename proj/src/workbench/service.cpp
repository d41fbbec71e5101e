#include "lloom/workbench/service.hpp"

#include <cstdio>

#include "lloom/core/events.hpp"
#include "lloom/core/session_io.hpp"
#include "lloom/core/validate.hpp"
#include "lloom/error.hpp"
#include "lloom/pipeline/induction.hpp"
#include "lloom/workbench/actions.hpp"
#include "lloom/workbench/views.hpp"

namespace lloom {

std::string_view to_string(JobState s) {
    switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Failed: return "failed";
    case JobState::Done: return "done";
    }
    return "unknown";
}

json to_json(const JobStatus& j) {
    json out{{"id", j.id},
             {"session_id", j.session_id},
             {"stage", j.stage},
             {"done", j.done},
             {"total", j.total},
             {"state", to_string(j.state)},
             {"concepts", j.concepts}};
    out["error"] = j.error.empty() ? json() : json(j.error);
    return out;
}

namespace {

void check_config(const SessionConfig& c) {
    Session probe;
    probe.config = c;
    for (const auto& v : validate_session(probe))
        if (v.code.rfind("config-", 0) == 0) throw ValidationError(v.detail);
}

} // namespace

WorkbenchService::WorkbenchService(std::shared_ptr<Gateway> gateway, TemplateSet templates, ServiceOptions options)
    : gateway_(std::move(gateway)), templates_(std::move(templates)), options_(std::move(options)) {
    if (options_.session_dir) std::filesystem::create_directories(*options_.session_dir);
}

WorkbenchService::~WorkbenchService() {
    for (auto& t : threads_)
        if (t.joinable()) t.join();
}

Gateway& WorkbenchService::gateway() const {
    if (!gateway_) throw ConfigError("no LLM provider configured for this service");
    return *gateway_;
}

std::shared_ptr<WorkbenchService::Slot> WorkbenchService::slot(const std::string& session_id) const {
    std::lock_guard lock(sessions_mu_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
    return it->second;
}

void WorkbenchService::publish(Slot& slot, Session s) {
    auto shared = std::make_shared<const Session>(std::move(s));
    if (options_.session_dir) save_session(*shared, *options_.session_dir / (shared->id + ".json"));
    std::lock_guard lock(slot.snap_mu);
    slot.committed = std::move(shared);
}

std::shared_ptr<const Session> WorkbenchService::snapshot(const std::string& session_id) const {
    const auto sl = slot(session_id);
    std::lock_guard lock(sl->snap_mu);
    return sl->committed;
}

template <typename F>
auto WorkbenchService::mutate(const std::string& session_id, F&& f) {
    const auto sl = slot(session_id);
    std::lock_guard lock(sl->write_mu);
    if (sl->job_running) throw ConflictError("an induction job is running on session '" + session_id + "'");
    Session work = *snapshot(session_id);
    auto result = f(work);
    publish(*sl, std::move(work));
    return result;
}

std::string WorkbenchService::create_session(const RawTable& table, const IngestOptions& ingest_opts,
                                             const std::optional<SessionConfig>& config, IngestReport* report) {
    const auto cfg = config.value_or(options_.default_config);
    check_config(cfg);
    auto data = ingest(table, ingest_opts);
    if (report) *report = data.report;

    std::lock_guard lock(sessions_mu_);
    std::string id;
    do {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%04zu", next_session_++);
        id = buf;
    } while (sessions_.count(id) ||
             (options_.session_dir && std::filesystem::exists(*options_.session_dir / (id + ".json"))));
    auto sl = std::make_shared<Slot>();
    publish(*sl, make_session(id, std::move(data), cfg, options_.clock));
    sessions_[id] = std::move(sl);
    return id;
}

void WorkbenchService::put_session(Session s) {
    std::lock_guard lock(sessions_mu_);
    if (sessions_.count(s.id)) throw ConflictError("session '" + s.id + "' already exists");
    auto sl = std::make_shared<Slot>();
    const auto id = s.id;
    {
        std::lock_guard snap(sl->snap_mu);
        sl->committed = std::make_shared<const Session>(std::move(s));
    }
    sessions_[id] = std::move(sl);
}

std::vector<std::string> WorkbenchService::list_sessions() const {
    std::lock_guard lock(sessions_mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

std::string WorkbenchService::start_induction(const std::string& session_id, const InductionParams& params) {
    const auto sl = slot(session_id);
    std::lock_guard lock(sl->write_mu);
    if (sl->job_running) throw ConflictError("an induction job is already running on session '" + session_id + "'");
    auto base = snapshot(session_id);

    std::string job_id;
    {
        std::lock_guard jl(jobs_mu_);
        job_id = "job-" + std::to_string(next_job_++);
        jobs_[job_id] = JobStatus{job_id, session_id, "queued", 0, 0, JobState::Queued, "", 0};
    }
    sl->job_running = true;

    auto update = [this, job_id](auto&& fn) {
        {
            std::lock_guard jl(jobs_mu_);
            fn(jobs_[job_id]);
        }
        jobs_cv_.notify_all();
    };

    std::lock_guard jl(jobs_mu_);
    threads_.emplace_back([this, sl, base, params, update] {
        update([](JobStatus& j) {
            j.state = JobState::Running;
            j.stage = "starting";
        });
        try {
            Session work = *base;
            auto cfg = work.config;
            if (params.seed_term) cfg.seed_term = *params.seed_term;
            if (params.rng_seed) cfg.rng_seed = *params.rng_seed;
            if (params.max_concepts) cfg.max_concepts = *params.max_concepts;
            if (params.loops) cfg.n_loops = *params.loops;
            check_config(cfg);
            if (!(cfg == work.config)) commit(work, options_.clock, Event{event_kind::kConfigSet, {{"config", to_json(cfg)}}});

            EngineContext ctx{gateway(), templates_, options_.clock,
                              [&](std::string_view stage, std::size_t done, std::size_t total) {
                                  update([&](JobStatus& j) {
                                      j.stage = std::string(stage);
                                      j.done = done;
                                      j.total = total;
                                  });
                              },
                              options_.workers};
            const auto result = run_iterations(ctx, work, cfg.n_loops);
            {
                std::lock_guard wl(sl->write_mu);
                publish(*sl, std::move(work));
                sl->job_running = false;
            }
            update([&](JobStatus& j) {
                j.state = JobState::Done;
                j.stage = "done";
                j.concepts = result.concept_ids.size();
            });
        } catch (const std::exception& e) {
            {
                std::lock_guard wl(sl->write_mu);
                sl->job_running = false;
            }
            const std::string msg = e.what();
            update([&](JobStatus& j) {
                j.state = JobState::Failed;
                j.error = msg;
            });
        }
    });
    return job_id;
}

JobStatus WorkbenchService::job_status(const std::string& job_id) const {
    std::lock_guard lock(jobs_mu_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw NotFoundError("unknown job '" + job_id + "'");
    return it->second;
}

JobStatus WorkbenchService::wait_job(const std::string& job_id) const {
    std::unique_lock lock(jobs_mu_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw NotFoundError("unknown job '" + job_id + "'");
    jobs_cv_.wait(lock, [&] { return it->second.state == JobState::Done || it->second.state == JobState::Failed; });
    return it->second;
}

std::string WorkbenchService::add_concept(const std::string& session_id, const std::string& name,
                                          const std::string& criteria) {
    return mutate(session_id, [&](Session& s) {
        EngineContext ctx{gateway(), templates_, options_.clock, {}, options_.workers};
        return lloom::add_concept(ctx, s, name, criteria);
    });
}

Concept WorkbenchService::edit_concept(const std::string& session_id, const std::string& concept_id,
                                       const std::optional<std::string>& name,
                                       const std::optional<std::string>& criteria) {
    return mutate(session_id, [&](Session& s) {
        EngineContext ctx{gateway(), templates_, options_.clock, {}, options_.workers};
        return lloom::edit_concept(ctx, s, concept_id, name, criteria);
    });
}

Concept WorkbenchService::merge_concepts(const std::string& session_id, const std::vector<std::string>& concept_ids) {
    return mutate(session_id, [&](Session& s) {
        EngineContext ctx{gateway(), templates_, options_.clock, {}, options_.workers};
        return lloom::merge_concepts(ctx, s, concept_ids);
    });
}

std::vector<Concept> WorkbenchService::split_concept(const std::string& session_id, const std::string& concept_id) {
    return mutate(session_id, [&](Session& s) {
        EngineContext ctx{gateway(), templates_, options_.clock, {}, options_.workers};
        return lloom::split_concept(ctx, s, concept_id);
    });
}

Slice WorkbenchService::define_slice(const std::string& session_id, const std::string& name,
                                     const std::string& predicate) {
    return mutate(session_id, [&](Session& s) { return lloom::define_slice(options_.clock, s, name, predicate); });
}

json WorkbenchService::matrix_view(const std::string& session_id, Normalization n) const {
    return lloom::matrix_view(*snapshot(session_id), n);
}

json WorkbenchService::concept_detail(const std::string& session_id, const std::string& concept_id) const {
    return lloom::concept_detail(*snapshot(session_id), concept_id);
}

json WorkbenchService::slice_detail(const std::string& session_id, const std::string& slice_name) const {
    return lloom::slice_detail(*snapshot(session_id), slice_name);
}

std::size_t load_sessions(WorkbenchService& service, const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir)) return 0;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) service.put_session(load_session_file(f));
    return files.size();
}

} // namespace lloom
