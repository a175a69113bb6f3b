#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elicit/config.hpp"
#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"
#include "elicit/interview.hpp"
#include "elicit/needs.hpp"

namespace elicit::pipeline {

/// Exclusive ownership of a run directory while a command runs.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& run_dir);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Executes the staged pipeline against one run directory. Every stage reads
/// its inputs from the previous stages' artifact files, so single-stage
/// commands and resume go through the same code path as a full run.
class Runner {
public:
    Runner(config::RunConfig config, std::filesystem::path run_dir,
           std::shared_ptr<gw::Provider> provider = nullptr);

    /// Opens an existing run directory: loads config.json and manifest.json
    /// and verifies the content hashes of every completed stage's artifacts.
    static Runner open(const std::filesystem::path& run_dir,
                       std::shared_ptr<gw::Provider> provider = nullptr);

    /// Runs every pending stage in order. On a stage error the manifest keeps
    /// that stage pending and artifacts of completed stages stay valid.
    void run_all();

    /// Runs one stage by name. Prior stages must be done (MissingPriorStage).
    /// Returns false when the stage was already done and force is off.
    bool run_stage(const std::string& stage, bool force = false);

    const domain::RunManifest& manifest() const { return manifest_; }
    const config::RunConfig& config() const { return config_; }
    const std::filesystem::path& run_dir() const { return run_dir_; }
    gw::Gateway& gateway() { return *gateway_; }

    /// Invoked after each stage completes and its manifest flush has landed.
    void set_stage_callback(std::function<void(const std::string&)> callback);

    // Artifact loaders, shared with the CLI.
    std::vector<domain::AgentProfile> load_agents() const;
    std::vector<domain::ProductExperience> load_experiences() const;
    std::vector<domain::InterviewTranscript> load_transcripts() const;
    std::vector<interview::Question> load_questions() const;

    static domain::RunManifest read_manifest(const std::filesystem::path& run_dir);

private:
    config::RunConfig config_;
    std::filesystem::path run_dir_;
    std::shared_ptr<gw::Provider> provider_;
    std::unique_ptr<gw::BufferingLedger> ledger_;
    std::unique_ptr<gw::Gateway> gateway_;
    prompts::PromptStore store_;
    domain::RunManifest manifest_;
    std::function<void(const std::string&)> on_stage_done_;

    Runner(config::RunConfig config, std::filesystem::path run_dir,
           std::shared_ptr<gw::Provider> provider, bool opening_existing);

    void init_new_run();
    void save_manifest();
    void record_artifact(const std::string& filename, const std::string& bytes);
    void write_artifact(const std::string& filename, const std::string& bytes);
    void execute_stage(const std::string& stage);

    void stage_agents();
    void stage_experiences();
    void stage_interviews();
    void stage_needs();
    void stage_metrics();
    void stage_report();
};

std::shared_ptr<gw::Provider> make_provider(const config::RunConfig& config);

} // namespace elicit::pipeline
