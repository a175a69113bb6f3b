#include "elicit/config.hpp"
#include "elicit/errors.hpp"
#include "elicit/eval.hpp"
#include "elicit/gateway.hpp"
#include "elicit/pipeline.hpp"
#include "elicit/prompts.hpp"
#include "elicit/util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace elicit;

constexpr int kExitOk = 0;
constexpr int kExitStageFailure = 1;
constexpr int kExitConfigError = 2;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides; // --set key=value
    std::optional<std::int64_t> seed;
    std::optional<std::string> provider;
    std::optional<std::string> mode;
};

config::RunConfig load_config(const GlobalArgs& args) {
    config::KeyValues kv;
    std::filesystem::path base_dir = ".";
    if (!args.config_path.empty()) {
        kv = config::KeyValues::parse_file(args.config_path);
        base_dir = std::filesystem::path(args.config_path).parent_path();
        if (base_dir.empty()) base_dir = ".";
    }
    for (const auto& assignment : args.overrides) kv.set_override(assignment);
    if (args.seed) kv.set_override("seed=" + std::to_string(*args.seed));
    if (args.provider) kv.set_override("provider.kind=" + *args.provider);
    if (args.mode) kv.set_override("needs.mode=" + *args.mode);
    return config::resolve(kv, base_dir);
}

void print_stage_summary(const domain::RunManifest& manifest) {
    for (const auto& stage : domain::stage_order())
        std::cout << "  " << stage << ": "
                  << domain::to_string(manifest.stage_status.at(stage)) << "\n";
}

int cmd_run(const GlobalArgs& args) {
    const auto cfg = load_config(args);
    pipeline::Runner runner(cfg, args.out_dir);
    runner.set_stage_callback(
        [](const std::string& stage) { std::cout << "stage done: " << stage << "\n"; });
    runner.run_all();
    std::cout << "run " << runner.manifest().run_id << " complete in " << args.out_dir
              << "\n";
    return kExitOk;
}

int cmd_resume(const std::string& dir) {
    auto runner = pipeline::Runner::open(dir);
    runner.set_stage_callback(
        [](const std::string& stage) { std::cout << "stage done: " << stage << "\n"; });
    runner.run_all();
    std::cout << "run " << runner.manifest().run_id << " complete\n";
    return kExitOk;
}

int cmd_stage(const std::string& dir, const std::string& stage, bool force) {
    auto runner = pipeline::Runner::open(dir);
    if (!runner.run_stage(stage, force)) {
        std::cout << "stage '" << stage << "' already done (use --force to rerun)\n";
        return kExitOk;
    }
    std::cout << "stage done: " << stage << "\n";
    print_stage_summary(runner.manifest());
    return kExitOk;
}

int cmd_cost(const std::string& dir) {
    const auto entries =
        gw::BufferingLedger::read_all(std::filesystem::path(dir) / "calls.ledger.jsonl");
    const auto cfg = config::RunConfig::from_json(nlohmann::json::parse(
        util::read_file(std::filesystem::path(dir) / "config.json")));
    gw::TokenUsage usage;
    for (const auto& entry : entries)
        usage += {entry.input_tokens, entry.output_tokens};
    const double cost = eval::cost_estimate(usage, cfg.pricing);
    std::printf("calls: %zu\ninput_tokens: %lld\noutput_tokens: %lld\ncost_usd: %.2f\n",
                entries.size(), static_cast<long long>(usage.input_tokens),
                static_cast<long long>(usage.output_tokens), cost);
    return kExitOk;
}

int cmd_benchmark(const GlobalArgs& args, const std::string& dataset_path,
                  const std::string& modes_csv, const std::string& out_path) {
    const auto cfg = load_config(args);
    const auto dataset = eval::LabeledNeedDataset::from_json(
        nlohmann::json::parse(util::read_file(dataset_path)));

    std::set<domain::ClassificationMode> modes;
    for (const auto& name : util::split(modes_csv, ','))
        modes.insert(domain::classification_mode_from_string(util::trim(name)));

    auto provider = pipeline::make_provider(cfg);
    gw::Gateway gateway(provider, cfg.provider, cfg.retry);
    const auto store = prompts::PromptStore::from_map(
        {cfg.prompt_overrides.begin(), cfg.prompt_overrides.end()});
    const auto criteria = std::optional<needs::LatentCriteria>{{cfg.criteria_text}};

    const auto results = eval::run_latent_benchmark(
        gateway, store, dataset, modes, criteria,
        static_cast<std::size_t>(cfg.max_in_flight));

    for (const auto& [mode, result] : results) {
        std::cout << domain::to_string(mode) << ": ";
        if (result.error) {
            std::cout << "error: " << *result.error << "\n";
            continue;
        }
        auto fmt = [](const std::optional<double>& v) {
            if (!v) return std::string("n/a");
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.4f", *v);
            return std::string(buf);
        };
        std::cout << "precision=" << fmt(result.metrics.precision)
                  << " recall=" << fmt(result.metrics.recall)
                  << " f1=" << fmt(result.metrics.f1) << "\n";
    }

    if (!out_path.empty()) {
        util::write_file(out_path, eval::benchmark_to_json(results).dump(2) + "\n");
        const auto csv_path =
            std::filesystem::path(out_path).replace_extension(".csv");
        util::write_file(csv_path, eval::benchmark_matrices_csv(results));
        std::cout << "wrote " << out_path << " and " << csv_path.string() << "\n";
    }
    for (const auto& [mode, result] : results)
        if (result.error) return kExitStageFailure;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulated-user requirements elicitation pipeline"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "TOML-style config file");
    app.add_option("--set", args.overrides, "Override a config key (key=value)");
    std::int64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the run seed");
    std::string provider_value;
    auto* provider_opt =
        app.add_option("--provider", provider_value, "Provider kind: mock|http");
    std::string mode_value;
    auto* mode_opt = app.add_option(
        "--mode", mode_value, "Classification mode: zero_shot|criteria|criteria_cot");

    auto* run = app.add_subcommand("run", "Run the full pipeline into a new directory");
    run->add_option("--out", args.out_dir, "Run directory to create")->required();

    auto* resume = app.add_subcommand("resume", "Continue a run from its first pending stage");
    std::string resume_dir;
    resume->add_option("--dir", resume_dir, "Existing run directory")->required();

    const std::map<std::string, std::string> stage_commands = {
        {"agents", "agents"},       {"simulate", "experiences"},
        {"interview", "interviews"}, {"analyze", "needs"},
        {"metrics", "metrics"},     {"report", "report"}};
    std::string stage_dir;
    bool stage_force = false;
    std::map<std::string, CLI::App*> stage_subs;
    for (const auto& [command, stage] : stage_commands) {
        auto* sub = app.add_subcommand(command, "Run the '" + stage + "' stage");
        sub->add_option("--dir", stage_dir, "Existing run directory")->required();
        sub->add_flag("--force", stage_force, "Rerun even if already done");
        stage_subs[command] = sub;
    }

    auto* benchmark =
        app.add_subcommand("benchmark", "Classify a labeled dataset under each mode");
    std::string dataset_path;
    std::string modes_csv = "zero_shot,criteria,criteria_cot";
    std::string benchmark_out;
    benchmark->add_option("--dataset", dataset_path, "JSON array of {text, latent}")
        ->required();
    benchmark->add_option("--modes", modes_csv, "Comma-separated classification modes");
    benchmark->add_option("--out-file", benchmark_out, "Where to write benchmark.json");

    auto* cost = app.add_subcommand("cost", "Ledger-reconciled cost estimate for a run");
    std::string cost_dir;
    cost->add_option("--dir", cost_dir, "Existing run directory")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
        if (*seed_opt) args.seed = seed_value;
        if (*provider_opt) args.provider = provider_value;
        if (*mode_opt) args.mode = mode_value;

        if (run->parsed()) return cmd_run(args);
        if (resume->parsed()) return cmd_resume(resume_dir);
        for (const auto& [command, stage] : stage_commands)
            if (stage_subs[command]->parsed())
                return cmd_stage(stage_dir, stage, stage_force);
        if (benchmark->parsed())
            return cmd_benchmark(args, dataset_path, modes_csv, benchmark_out);
        if (cost->parsed()) return cmd_cost(cost_dir);
        return kExitConfigError;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    } catch (const elicit::Error& e) {
        std::cerr << elicit::error_code_name(e.code()) << ": " << e.what() << "\n";
        return e.code() == elicit::ErrorCode::config ? kExitConfigError
                                                     : kExitStageFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    }
}
