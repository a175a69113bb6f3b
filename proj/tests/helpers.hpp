#pragma once

#include "elicit/config.hpp"
#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"
#include "elicit/mock_provider.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <unistd.h>

namespace test_helpers {

using namespace elicit;

inline domain::DesignBrief tent_brief() {
    domain::DesignBrief brief;
    brief.product_name = "tent";
    brief.product_description =
        "A portable shelter for outdoor activities such as camping, trekking, "
        "and field work.";
    brief.categories = {"size",       "shape",      "weight",    "material",
                        "safety",     "durability", "aesthetics", "ergonomics",
                        "cost",       "setup",      "transport"};
    brief.typical_user_profile =
        "The typical user would be a weekend camper, 15-30 years old, with very "
        "good health and physical fitness, who camps a few times a year. The "
        "typical usage environment would be a public park or wilderness area, in "
        "a generally wooded or grassy environment with warm, sunny weather.";
    return brief;
}

struct MockRig {
    std::shared_ptr<gw::MockProvider> mock;
    std::unique_ptr<gw::Gateway> gateway;

    gw::Gateway& gw_ref() { return *gateway; }
};

inline MockRig make_rig(std::uint64_t seed = 7,
                        std::vector<std::string> script = {},
                        gw::LedgerSink* ledger = nullptr,
                        int max_attempts = 3) {
    MockRig rig;
    rig.mock = std::make_shared<gw::MockProvider>(seed, std::move(script));
    gw::ProviderConfig config;
    gw::RetryPolicy policy;
    policy.max_attempts = max_attempts;
    rig.gateway =
        std::make_unique<gw::Gateway>(rig.mock, config, policy, ledger);
    return rig;
}

inline std::vector<domain::EmbeddingVector> points_1d(std::vector<double> xs) {
    std::vector<domain::EmbeddingVector> out;
    for (double x : xs) out.push_back(domain::EmbeddingVector{{x}});
    return out;
}

inline std::vector<domain::EmbeddingVector> random_points(std::size_t n,
                                                          std::size_t dim,
                                                          std::uint64_t seed,
                                                          double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<domain::EmbeddingVector> out(n);
    for (auto& p : out) {
        p.values.resize(dim);
        for (auto& v : p.values) v = u(rng);
    }
    return out;
}

/// Scoped temp directory under the build tree.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("elicit-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline config::RunConfig small_mock_config(int n_agents = 3, std::int64_t seed = 7) {
    config::RunConfig cfg;
    cfg.brief = tent_brief();
    cfg.provider_kind = "mock";
    cfg.n_agents = n_agents;
    cfg.seed = seed;
    cfg.strategy = "serial";
    cfg.min_steps = 3;
    cfg.max_steps = 6;
    cfg.mode = domain::ClassificationMode::criteria_cot;
    cfg.criteria_text = prompts::default_latent_criteria();
    cfg.max_in_flight = 4;
    config::validate(cfg);
    return cfg;
}

} // namespace test_helpers
