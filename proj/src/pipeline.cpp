#include "elicit/pipeline.hpp"

#include "elicit/diversity/metrics.hpp"
#include "elicit/diversity/pca.hpp"
#include "elicit/errors.hpp"
#include "elicit/experience.hpp"
#include "elicit/forge.hpp"
#include "elicit/http_provider.hpp"
#include "elicit/mock_provider.hpp"
#include "elicit/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fcntl.h>
#include <unistd.h>

namespace elicit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kFixedTimestamp[] = "1970-01-01T00:00:00Z";

const std::map<std::string, std::vector<std::string>>& stage_artifacts() {
    static const std::map<std::string, std::vector<std::string>> artifacts = {
        {"agents", {"agents.json"}},
        {"experiences", {"experiences.json"}},
        {"interviews", {"interviews.json", "questions.json"}},
        {"needs", {"needs.json"}},
        {"metrics", {"metrics.json", "silhouette_vs_k.csv", "projection_2d.csv"}},
        {"report", {"report.md", "report.json"}},
    };
    return artifacts;
}

std::string format_index(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return buf;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

DirectoryLock::DirectoryLock(const fs::path& run_dir) : path_(run_dir / "run.lock") {
    fs::create_directories(run_dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
        throw Error(ErrorCode::io,
                    "run directory is locked (remove stale " + path_.string() +
                        " if no other process owns it)");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

DirectoryLock::~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

std::shared_ptr<gw::Provider> make_provider(const config::RunConfig& config) {
    if (config.provider_kind == "mock")
        return std::make_shared<gw::MockProvider>(
            static_cast<std::uint64_t>(config.seed), std::vector<std::string>{},
            config.mock_embedding_dim);
    gw::ProviderConfig provider_config = config.provider;
    if (const char* key = std::getenv(config.api_key_env.c_str()))
        provider_config.api_key = key;
    return std::make_shared<gw::HttpProvider>(std::move(provider_config));
}

Runner::Runner(config::RunConfig config, fs::path run_dir,
               std::shared_ptr<gw::Provider> provider)
    : Runner(std::move(config), std::move(run_dir), std::move(provider), false) {}

Runner::Runner(config::RunConfig config, fs::path run_dir,
               std::shared_ptr<gw::Provider> provider, bool opening_existing)
    : config_(std::move(config)),
      run_dir_(std::move(run_dir)),
      provider_(provider ? std::move(provider) : make_provider(config_)),
      store_(prompts::PromptStore::from_map(
          {config_.prompt_overrides.begin(), config_.prompt_overrides.end()})) {
    fs::create_directories(run_dir_);
    ledger_ = std::make_unique<gw::BufferingLedger>(run_dir_ / "calls.ledger.jsonl");
    gw::ProviderConfig provider_config = config_.provider;
    gateway_ = std::make_unique<gw::Gateway>(provider_, provider_config, config_.retry,
                                             ledger_.get());
    if (!opening_existing) init_new_run();
}

void Runner::init_new_run() {
    if (fs::exists(run_dir_ / "manifest.json"))
        throw Error(ErrorCode::io,
                    "run directory already contains a manifest: " + run_dir_.string());

    manifest_.run_id = config_.resolved_run_id();
    manifest_.brief = config_.brief;
    manifest_.seed = config_.seed;
    manifest_.provider_id = provider_->id();
    manifest_.created_at =
        config_.deterministic_timestamps ? kFixedTimestamp : util::iso8601_utc_now();
    for (const auto& stage : domain::stage_order())
        manifest_.stage_status[stage] = domain::StageStatus::pending;

    const std::string config_bytes = config_.to_json().dump(2) + "\n";
    util::write_file(run_dir_ / "config.json", config_bytes);
    manifest_.artifact_hashes["config.json"] = util::content_hash(config_bytes);
    save_manifest();
}

Runner Runner::open(const fs::path& run_dir, std::shared_ptr<gw::Provider> provider) {
    const auto config_path = run_dir / "config.json";
    if (!fs::exists(config_path))
        throw Error(ErrorCode::corrupt_manifest,
                    "missing config.json in " + run_dir.string());
    config::RunConfig config;
    try {
        config = config::RunConfig::from_json(json::parse(util::read_file(config_path)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::corrupt_manifest,
                    std::string("unreadable config.json: ") + e.what());
    }

    Runner runner(std::move(config), run_dir, std::move(provider), true);
    runner.manifest_ = read_manifest(run_dir);

    // Completed stages must still match the bytes recorded at flush time.
    for (const auto& [stage, files] : stage_artifacts()) {
        if (runner.manifest_.stage_status.at(stage) != domain::StageStatus::done)
            continue;
        for (const auto& file : files) {
            const auto it = runner.manifest_.artifact_hashes.find(file);
            if (it == runner.manifest_.artifact_hashes.end())
                throw Error(ErrorCode::corrupt_manifest,
                            "manifest lacks a hash for " + file);
            const auto path = run_dir / file;
            if (!fs::exists(path))
                throw Error(ErrorCode::artifact_hash_mismatch,
                            "artifact missing: " + file);
            if (util::content_hash(util::read_file(path)) != it->second)
                throw Error(ErrorCode::artifact_hash_mismatch,
                            "artifact content changed: " + file);
        }
    }
    return runner;
}

domain::RunManifest Runner::read_manifest(const fs::path& run_dir) {
    const auto path = run_dir / "manifest.json";
    if (!fs::exists(path))
        throw Error(ErrorCode::corrupt_manifest, "missing manifest.json in " +
                                                     run_dir.string());
    try {
        return domain::manifest_from_json(json::parse(util::read_file(path)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::corrupt_manifest,
                    std::string("unreadable manifest.json: ") + e.what());
    } catch (const ValidationError& e) {
        throw Error(ErrorCode::corrupt_manifest,
                    std::string("inconsistent manifest: ") + e.what());
    }
}

void Runner::save_manifest() {
    domain::validate(manifest_); // stage-order invariant holds at every flush
    util::write_file(run_dir_ / "manifest.json",
                     domain::to_json(manifest_).dump(2) + "\n");
}

void Runner::write_artifact(const std::string& filename, const std::string& bytes) {
    util::write_file(run_dir_ / filename, bytes);
    record_artifact(filename, bytes);
}

void Runner::record_artifact(const std::string& filename, const std::string& bytes) {
    manifest_.artifact_hashes[filename] = util::content_hash(bytes);
}

void Runner::set_stage_callback(std::function<void(const std::string&)> callback) {
    on_stage_done_ = std::move(callback);
}

void Runner::run_all() {
    DirectoryLock lock(run_dir_);
    for (const auto& stage : domain::stage_order()) {
        if (manifest_.stage_status.at(stage) == domain::StageStatus::done) continue;
        execute_stage(stage);
    }
}

bool Runner::run_stage(const std::string& stage, bool force) {
    const auto& order = domain::stage_order();
    const auto it = std::find(order.begin(), order.end(), stage);
    if (it == order.end())
        throw Error(ErrorCode::config, "unknown stage: " + stage);
    for (auto prior = order.begin(); prior != it; ++prior)
        if (manifest_.stage_status.at(*prior) != domain::StageStatus::done)
            throw Error(ErrorCode::missing_prior_stage,
                        "stage '" + stage + "' requires completed stage '" + *prior + "'");
    if (manifest_.stage_status.at(stage) == domain::StageStatus::done && !force)
        return false;

    DirectoryLock lock(run_dir_);
    if (force) {
        // Rerunning a stage invalidates everything after it.
        for (auto later = it; later != order.end(); ++later)
            manifest_.stage_status.at(*later) = domain::StageStatus::pending;
    }
    execute_stage(stage);
    return true;
}

void Runner::execute_stage(const std::string& stage) {
    try {
        if (stage == "agents") stage_agents();
        else if (stage == "experiences") stage_experiences();
        else if (stage == "interviews") stage_interviews();
        else if (stage == "needs") stage_needs();
        else if (stage == "metrics") stage_metrics();
        else if (stage == "report") stage_report();
        else throw Error(ErrorCode::config, "unknown stage: " + stage);
    } catch (...) {
        ledger_->flush(); // keep the audit trail of the failed stage
        throw;
    }
    manifest_.stage_status.at(stage) = domain::StageStatus::done;
    ledger_->flush();
    save_manifest();
    if (on_stage_done_) on_stage_done_(stage);
}

// --- stages -----------------------------------------------------------------

void Runner::stage_agents() {
    std::vector<domain::AgentProfile> agents;

    forge::GenerationRequest request;
    request.brief = config_.brief;
    request.n = config_.n_agents;
    request.steering_text = config_.steering_text;
    request.seed = config_.seed;
    request.serial_cap = config_.serial_cap;

    if (config_.strategy == "manual") {
        agents = forge::inject_manual(config_.brief, config_.manual_agents);
    } else if (config_.strategy == "serial") {
        request.strategy = domain::AgentOrigin::serial;
        agents = forge::generate_serial(*gateway_, store_, request);
    } else if (config_.strategy == "parallel") {
        request.strategy = domain::AgentOrigin::parallel;
        agents = forge::generate_parallel(*gateway_, store_, request,
                                          static_cast<std::size_t>(config_.max_in_flight));
    } else { // parallel_filtered
        request.strategy = domain::AgentOrigin::parallel_filtered;
        request.overgeneration_factor = config_.overgeneration_factor;
        auto candidates = forge::generate_parallel(
            *gateway_, store_, request, static_cast<std::size_t>(config_.max_in_flight));
        std::vector<std::string> descriptions;
        for (const auto& agent : candidates) descriptions.push_back(agent.description);
        const auto embeddings = gateway_->embed("agents", "00.embed", descriptions);
        agents = forge::select_diverse(candidates, embeddings, config_.n_agents,
                                       config_.seed)
                     .selected;
    }

    domain::validate_agent_set(agents);
    json out = json::array();
    for (const auto& agent : agents) out.push_back(domain::to_json(agent));
    write_artifact("agents.json", out.dump(2) + "\n");
}

std::vector<domain::AgentProfile> Runner::load_agents() const {
    const auto parsed = json::parse(util::read_file(run_dir_ / "agents.json"));
    std::vector<domain::AgentProfile> agents;
    for (const auto& item : parsed) agents.push_back(domain::agent_from_json(item));
    return agents;
}

void Runner::stage_experiences() {
    const auto agents = load_agents();
    std::function<domain::ProductExperience(std::size_t)> task = [&](std::size_t i) {
        return experience::simulate_experience(*gateway_, store_, config_.brief,
                                               agents[i], config_.min_steps,
                                               config_.max_steps, "experiences",
                                               format_index(i));
    };
    const auto experiences = util::parallel_map<domain::ProductExperience>(
        agents.size(), static_cast<std::size_t>(config_.max_in_flight), task);

    json out = json::array();
    for (const auto& exp : experiences) out.push_back(domain::to_json(exp));
    write_artifact("experiences.json", out.dump(2) + "\n");
}

std::vector<domain::ProductExperience> Runner::load_experiences() const {
    const auto parsed = json::parse(util::read_file(run_dir_ / "experiences.json"));
    std::vector<domain::ProductExperience> experiences;
    for (const auto& item : parsed)
        experiences.push_back(domain::experience_from_json(item));
    return experiences;
}

void Runner::stage_interviews() {
    const auto agents = load_agents();
    const auto experiences = load_experiences();
    if (agents.size() != experiences.size())
        throw Error(ErrorCode::corrupt_manifest,
                    "agents.json and experiences.json disagree on cardinality");

    const auto pool = config_.question_pool.empty()
                          ? interview::build_question_pool(
                                config_.brief, config_.include_freestyle, store_)
                          : config_.question_pool;
    for (const auto& question : pool) {
        interview::validate(question);
        if (question.category &&
            std::find(config_.brief.categories.begin(), config_.brief.categories.end(),
                      *question.category) == config_.brief.categories.end())
            throw ValidationError("question " + question.id +
                                  " uses a category outside the brief: " +
                                  *question.category);
    }
    json pool_json = json::array();
    for (const auto& q : pool) pool_json.push_back(interview::to_json(q));
    write_artifact("questions.json", pool_json.dump(2) + "\n");

    struct Outcome {
        domain::InterviewTranscript transcript;
        std::optional<std::string> error;
    };
    std::function<Outcome(std::size_t)> task = [&](std::size_t i) -> Outcome {
        try {
            return {interview::conduct_interview(*gateway_, store_, agents[i],
                                                 experiences[i], pool, "interviews",
                                                 format_index(i)),
                    std::nullopt};
        } catch (const interview::InterviewAborted& aborted) {
            return {aborted.partial(), aborted.what()};
        }
    };
    const auto outcomes = util::parallel_map<Outcome>(
        agents.size(), static_cast<std::size_t>(config_.max_in_flight), task);

    // Persist every transcript, incomplete ones included, before failing.
    json out = json::array();
    std::optional<std::string> first_error;
    for (const auto& outcome : outcomes) {
        out.push_back(domain::to_json(outcome.transcript));
        if (outcome.error && !first_error) first_error = outcome.error;
    }
    const std::string bytes = out.dump(2) + "\n";
    util::write_file(run_dir_ / "interviews.json", bytes);
    if (first_error)
        throw SchemaExhausted("interview stage failed: " + *first_error, "");
    record_artifact("interviews.json", bytes);
}

std::vector<domain::InterviewTranscript> Runner::load_transcripts() const {
    const auto parsed = json::parse(util::read_file(run_dir_ / "interviews.json"));
    std::vector<domain::InterviewTranscript> transcripts;
    for (const auto& item : parsed)
        transcripts.push_back(domain::transcript_from_json(item));
    return transcripts;
}

std::vector<interview::Question> Runner::load_questions() const {
    const auto parsed = json::parse(util::read_file(run_dir_ / "questions.json"));
    std::vector<interview::Question> pool;
    for (const auto& item : parsed) pool.push_back(interview::question_from_json(item));
    return pool;
}

void Runner::stage_needs() {
    const auto transcripts = load_transcripts();

    std::function<needs::ExtractionResult(std::size_t)> extract_task =
        [&](std::size_t i) {
            return needs::extract_needs(*gateway_, store_, config_.brief,
                                        transcripts[i], "needs", format_index(i));
        };
    const auto extractions = util::parallel_map<needs::ExtractionResult>(
        transcripts.size(), static_cast<std::size_t>(config_.max_in_flight),
        extract_task);

    std::vector<domain::NeedStatement> statements;
    std::vector<std::string> skipped;
    for (const auto& extraction : extractions) {
        statements.insert(statements.end(), extraction.needs.begin(),
                          extraction.needs.end());
        skipped.insert(skipped.end(), extraction.skipped_question_ids.begin(),
                       extraction.skipped_question_ids.end());
    }
    if (config_.dedup_needs) statements = needs::dedup_needs(statements);

    const auto criteria =
        config_.mode == domain::ClassificationMode::zero_shot
            ? std::optional<needs::LatentCriteria>{}
            : std::optional<needs::LatentCriteria>{{config_.criteria_text}};

    std::function<domain::NeedLabel(std::size_t)> classify_task = [&](std::size_t i) {
        char key[32];
        std::snprintf(key, sizeof(key), "label.%04zu", i);
        return needs::classify_latent(*gateway_, store_, statements[i], config_.mode,
                                      criteria, "needs", key);
    };
    const auto labels = util::parallel_map<domain::NeedLabel>(
        statements.size(), static_cast<std::size_t>(config_.max_in_flight),
        classify_task);

    json statements_json = json::array();
    for (const auto& need : statements) statements_json.push_back(domain::to_json(need));
    json labels_json = json::array();
    for (const auto& label : labels) labels_json.push_back(domain::to_json(label));
    const json out{{"mode", domain::to_string(config_.mode)},
                   {"statements", std::move(statements_json)},
                   {"labels", std::move(labels_json)},
                   {"skipped_question_ids", skipped}};
    write_artifact("needs.json", out.dump(2) + "\n");
}

void Runner::stage_metrics() {
    const auto agents = load_agents();
    const auto transcripts = load_transcripts();
    const auto pool = load_questions();
    const auto n = agents.size();

    // Row sets: the user role descriptions plus one set per interview question.
    std::vector<std::pair<std::string, std::vector<std::string>>> row_texts;
    {
        std::vector<std::string> descriptions;
        for (const auto& agent : agents) descriptions.push_back(agent.description);
        row_texts.emplace_back("User", std::move(descriptions));
    }
    for (const auto& question : pool) {
        std::vector<std::string> answers;
        for (const auto& transcript : transcripts) {
            const auto qa = std::find_if(
                transcript.qas.begin(), transcript.qas.end(),
                [&](const domain::InterviewQA& qa) { return qa.question_id == question.id; });
            if (qa == transcript.qas.end())
                throw Error(ErrorCode::missing_prior_stage,
                            "transcript for " + transcript.agent_name +
                                " lacks question " + question.id);
            answers.push_back(qa->answer_text);
        }
        const std::string row_name = question.kind == domain::QuestionKind::freestyle
                                         ? "Characteristics"
                                         : capitalize(question.category.value_or(""));
        row_texts.emplace_back(row_name, std::move(answers));
    }

    diversity::MethodEmbeddingSets sets;
    sets.method = config_.strategy;
    std::vector<domain::EmbeddingVector> user_embeddings;
    for (std::size_t r = 0; r < row_texts.size(); ++r) {
        char key[32];
        std::snprintf(key, sizeof(key), "row%02zu", r);
        auto embeddings = gateway_->embed("metrics", key, row_texts[r].second);
        if (r == 0) user_embeddings = embeddings;
        sets.rows.emplace_back(row_texts[r].first, std::move(embeddings));
    }

    const auto hull_table = diversity::diversity_table(
        {sets}, diversity::DiversityMetric::hull_volume, config_.hull_target_dim);
    const auto centroid_table = diversity::diversity_table(
        {sets}, diversity::DiversityMetric::mean_centroid_distance,
        config_.hull_target_dim);

    json metrics{{"row_sets", json::array()},
                 {"tables",
                  {{"hull_volume", hull_table.to_json()},
                   {"mean_centroid_distance", centroid_table.to_json()}}}};
    for (const auto& [name, _] : row_texts) metrics["row_sets"].push_back(name);

    std::string silhouette_csv = "k,mean_silhouette\n";
    std::string projection_csv = "x,y,cluster\n";

    if (n >= 3) {
        const int k_hi = std::min(config_.k_max, static_cast<int>(n) - 1);
        const auto selection = diversity::best_k(user_embeddings, 2, k_hi, config_.seed);
        json scores = json::object();
        for (const auto& [k, score] : selection.scores) {
            scores[std::to_string(k)] = score;
            silhouette_csv += std::to_string(k) + "," + csv_double(score) + "\n";
        }
        metrics["silhouette"] = {{"scores", std::move(scores)},
                                 {"best_k", selection.best_k}};

        const auto clusters =
            diversity::kmeans(user_embeddings, selection.best_k, config_.seed);
        const auto projection = diversity::project_2d(user_embeddings);
        json projection_json = json::array();
        for (std::size_t i = 0; i < projection.size(); ++i) {
            projection_json.push_back({projection[i][0], projection[i][1]});
            projection_csv += csv_double(projection[i][0]) + "," +
                              csv_double(projection[i][1]) + "," +
                              std::to_string(clusters.labels[i]) + "\n";
        }
        metrics["projection_2d"] = std::move(projection_json);
        metrics["cluster_labels"] = clusters.labels;

        if (config_.cluster_themes) {
            std::vector<std::vector<std::string>> groups(
                static_cast<std::size_t>(clusters.k));
            for (std::size_t i = 0; i < agents.size(); ++i)
                groups[static_cast<std::size_t>(clusters.labels[i])].push_back(
                    agents[i].description);
            metrics["themes"] = diversity::theme_clusters(*gateway_, groups);
        }
    }

    write_artifact("metrics.json", metrics.dump(2) + "\n");
    write_artifact("silhouette_vs_k.csv", silhouette_csv);
    write_artifact("projection_2d.csv", projection_csv);
}

void Runner::stage_report() {
    const auto parsed = json::parse(util::read_file(run_dir_ / "needs.json"));
    std::vector<domain::NeedStatement> statements;
    for (const auto& item : parsed.at("statements"))
        statements.push_back(domain::need_from_json(item));
    std::vector<domain::NeedLabel> labels;
    for (const auto& item : parsed.at("labels"))
        labels.push_back(domain::label_from_json(item));

    const std::string criteria_text =
        config_.mode == domain::ClassificationMode::zero_shot ? "" : config_.criteria_text;
    const auto result = needs::generate_report(statements, labels, manifest_,
                                               criteria_text);
    write_artifact("report.md", result.markdown);
    write_artifact("report.json", result.report.to_json().dump(2) + "\n");
}

} // namespace elicit::pipeline
