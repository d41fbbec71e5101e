#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/io/dataset.hpp"
#include "lloom/llm/gateway.hpp"
#include "lloom/llm/templates.hpp"
#include "lloom/scoring/scoring.hpp"

namespace lloom {

enum class JobState { Queued, Running, Failed, Done };
std::string_view to_string(JobState s);

struct JobStatus {
    std::string id;
    std::string session_id;
    std::string stage;
    std::size_t done = 0;
    std::size_t total = 0;
    JobState state = JobState::Queued;
    std::string error;
    std::size_t concepts = 0;
};

json to_json(const JobStatus& j);

struct InductionParams {
    std::optional<std::size_t> loops;
    std::optional<std::string> seed_term;
    std::optional<std::uint64_t> rng_seed;
    std::optional<std::size_t> max_concepts;
};

struct ServiceOptions {
    /// Sessions are persisted as <dir>/<id>.json after every mutation.
    std::optional<std::filesystem::path> session_dir;
    SessionConfig default_config;
    std::size_t workers = 4;
    Clock clock = system_clock();
};

/// Session store plus the operations behind the workbench API. Mutations on
/// one session are serialized; reads return the last committed snapshot.
class WorkbenchService {
public:
    /// `gateway` may be null; LLM-backed operations then fail with ConfigError.
    WorkbenchService(std::shared_ptr<Gateway> gateway, TemplateSet templates, ServiceOptions options);
    ~WorkbenchService();

    WorkbenchService(const WorkbenchService&) = delete;
    WorkbenchService& operator=(const WorkbenchService&) = delete;

    std::string create_session(const RawTable& table, const IngestOptions& ingest,
                               const std::optional<SessionConfig>& config, IngestReport* report = nullptr);
    /// Adds an existing session (e.g. loaded from disk). Throws ConflictError on id reuse.
    void put_session(Session s);
    std::vector<std::string> list_sessions() const;
    std::shared_ptr<const Session> snapshot(const std::string& session_id) const;

    std::string start_induction(const std::string& session_id, const InductionParams& params);
    JobStatus job_status(const std::string& job_id) const;
    /// Blocks until the job leaves the queued/running states.
    JobStatus wait_job(const std::string& job_id) const;

    std::string add_concept(const std::string& session_id, const std::string& name, const std::string& criteria);
    Concept edit_concept(const std::string& session_id, const std::string& concept_id,
                         const std::optional<std::string>& name, const std::optional<std::string>& criteria);
    Concept merge_concepts(const std::string& session_id, const std::vector<std::string>& concept_ids);
    std::vector<Concept> split_concept(const std::string& session_id, const std::string& concept_id);
    Slice define_slice(const std::string& session_id, const std::string& name, const std::string& predicate);

    json matrix_view(const std::string& session_id, Normalization n) const;
    json concept_detail(const std::string& session_id, const std::string& concept_id) const;
    json slice_detail(const std::string& session_id, const std::string& slice_name) const;

private:
    struct Slot {
        std::mutex write_mu;
        mutable std::mutex snap_mu;
        std::shared_ptr<const Session> committed;
        bool job_running = false;
    };

    std::shared_ptr<Slot> slot(const std::string& session_id) const;
    void publish(Slot& slot, Session s);
    /// Runs `f` on a copy of the session under the write lock and publishes
    /// the result only if `f` returns normally.
    template <typename F>
    auto mutate(const std::string& session_id, F&& f);
    Gateway& gateway() const;

    std::shared_ptr<Gateway> gateway_;
    TemplateSet templates_;
    ServiceOptions options_;

    mutable std::mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::size_t next_session_ = 1;

    mutable std::mutex jobs_mu_;
    mutable std::condition_variable jobs_cv_;
    std::map<std::string, JobStatus> jobs_;
    std::vector<std::thread> threads_;
    std::size_t next_job_ = 1;
};

/// Loads every *.json session in `dir` into `service`.
std::size_t load_sessions(WorkbenchService& service, const std::filesystem::path& dir);

} // namespace lloom
