#include "elicit/config.hpp"

#include "elicit/errors.hpp"
#include "elicit/prompts.hpp"
#include "elicit/util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace elicit::config {

namespace {

Error config_error(const std::string& message) {
    return Error(ErrorCode::config, message);
}

ConfigValue parse_scalar(const std::string& raw, const std::string& key) {
    const std::string value = util::trim(raw);
    if (value.empty()) throw config_error("empty value for key: " + key);

    if (value.front() == '"') {
        if (value.size() < 2 || value.back() != '"')
            throw config_error("unterminated string for key: " + key);
        return value.substr(1, value.size() - 2);
    }
    if (value.front() == '[') {
        if (value.back() != ']')
            throw config_error("unterminated array for key: " + key);
        std::vector<std::string> items;
        for (const auto& part : util::split(value.substr(1, value.size() - 2), ',')) {
            std::string item = util::trim(part);
            if (item.empty()) continue;
            if (item.front() == '"' && item.back() == '"' && item.size() >= 2)
                item = item.substr(1, item.size() - 2);
            items.push_back(item);
        }
        return items;
    }
    if (value == "true") return true;
    if (value == "false") return false;

    // Integer, then float, then bare string.
    std::int64_t int_value = 0;
    auto [iptr, iec] = std::from_chars(value.data(), value.data() + value.size(), int_value);
    if (iec == std::errc{} && iptr == value.data() + value.size()) return int_value;
    double dbl_value = 0.0;
    auto [dptr, dec] = std::from_chars(value.data(), value.data() + value.size(), dbl_value);
    if (dec == std::errc{} && dptr == value.data() + value.size()) return dbl_value;
    return value;
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

} // namespace

KeyValues KeyValues::parse_text(const std::string& text) {
    KeyValues kv;
    std::string section;
    for (const auto& raw_line : util::split(text, '\n')) {
        const std::string line = util::trim(strip_comment(raw_line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("malformed section header: " + line);
            section = util::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("expected key = value, got: " + line);
        std::string key = util::trim(line.substr(0, eq));
        if (key.empty()) throw config_error("empty key in line: " + line);
        if (!section.empty()) key = section + "." + key;
        kv.values_[key] = parse_scalar(line.substr(eq + 1), key);
    }
    return kv;
}

KeyValues KeyValues::parse_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw config_error("config file not found: " + path.string());
    return parse_text(util::read_file(path));
}

void KeyValues::set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw config_error("--set expects key=value, got: " + assignment);
    const std::string key = util::trim(assignment.substr(0, eq));
    if (key.empty()) throw config_error("--set has an empty key");
    values_[key] = parse_scalar(assignment.substr(eq + 1), key);
}

bool KeyValues::has(const std::string& key) const {
    return values_.find(key) != values_.end();
}

std::string KeyValues::get_string(const std::string& key,
                                  const std::string& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw config_error("expected string for key: " + key);
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) return *i;
    throw config_error("expected integer for key: " + key);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* d = std::get_if<double>(&it->second)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&it->second))
        return static_cast<double>(*i);
    throw config_error("expected number for key: " + key);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* b = std::get_if<bool>(&it->second)) return *b;
    throw config_error("expected boolean for key: " + key);
}

std::vector<std::string> KeyValues::get_strings(
    const std::string& key, std::vector<std::string> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (const auto* v = std::get_if<std::vector<std::string>>(&it->second)) return *v;
    if (const auto* s = std::get_if<std::string>(&it->second)) return {*s};
    throw config_error("expected string array for key: " + key);
}

std::string RunConfig::resolved_run_id() const {
    if (!run_id.empty()) return run_id;
    return "run-" +
           util::to_hex(util::fnv1a64(brief.product_name + "|" + std::to_string(seed)))
               .substr(8);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json manual = nlohmann::json::array();
    for (const auto& [name, description] : manual_agents)
        manual.push_back({{"name", name}, {"description", description}});
    nlohmann::json pool = nlohmann::json::array();
    for (const auto& q : question_pool) pool.push_back(interview::to_json(q));

    nlohmann::json j{
        {"brief", domain::to_json(brief)},
        {"provider",
         {{"kind", provider_kind},
          {"base_url", provider.base_url},
          {"chat_model", provider.chat_model},
          {"embedding_model", provider.embedding_model},
          {"temperature", provider.temperature},
          {"max_output_tokens", provider.max_output_tokens},
          {"request_timeout_ms", provider.request_timeout.count()},
          {"api_key_env", api_key_env},
          {"mock_embedding_dim", mock_embedding_dim}}},
        {"retry",
         {{"max_attempts", retry.max_attempts},
          {"on_schema_violation",
           retry.on_schema_violation == gw::OnSchemaViolation::reprompt_with_error
               ? "reprompt_with_error"
               : "fail"}}},
        {"generation",
         {{"strategy", strategy},
          {"n", n_agents},
          {"overgeneration_factor", overgeneration_factor},
          {"serial_cap", serial_cap},
          {"manual_agents", std::move(manual)}}},
        {"experience", {{"min_steps", min_steps}, {"max_steps", max_steps}}},
        {"interview",
         {{"include_freestyle", include_freestyle}, {"pool", std::move(pool)}}},
        {"needs",
         {{"mode", domain::to_string(mode)},
          {"criteria_text", criteria_text},
          {"dedup", dedup_needs}}},
        {"metrics",
         {{"hull_target_dim", hull_target_dim},
          {"k_max", k_max},
          {"cluster_themes", cluster_themes}}},
        {"pricing",
         {{"input_price_per_1m", pricing.input_price_per_1m},
          {"output_price_per_1m", pricing.output_price_per_1m}}},
        {"seed", seed},
        {"max_in_flight", max_in_flight},
        {"run_id", resolved_run_id()},
        {"prompt_overrides", prompt_overrides},
        {"deterministic_timestamps", deterministic_timestamps}};
    if (steering_text) j["generation"]["steering_text"] = *steering_text;

    std::vector<std::chrono::milliseconds::rep> backoff;
    for (const auto& b : retry.backoff) backoff.push_back(b.count());
    j["retry"]["backoff_ms"] = backoff;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.brief = domain::brief_from_json(j.at("brief"));
    const auto& provider = j.at("provider");
    cfg.provider_kind = provider.at("kind").get<std::string>();
    cfg.provider.base_url = provider.at("base_url").get<std::string>();
    cfg.provider.chat_model = provider.at("chat_model").get<std::string>();
    cfg.provider.embedding_model = provider.at("embedding_model").get<std::string>();
    cfg.provider.temperature = provider.at("temperature").get<double>();
    cfg.provider.max_output_tokens = provider.at("max_output_tokens").get<int>();
    cfg.provider.request_timeout =
        std::chrono::milliseconds(provider.at("request_timeout_ms").get<std::int64_t>());
    cfg.api_key_env = provider.at("api_key_env").get<std::string>();
    cfg.mock_embedding_dim = provider.at("mock_embedding_dim").get<int>();

    const auto& retry = j.at("retry");
    cfg.retry.max_attempts = retry.at("max_attempts").get<int>();
    cfg.retry.on_schema_violation =
        retry.at("on_schema_violation").get<std::string>() == "fail"
            ? gw::OnSchemaViolation::fail
            : gw::OnSchemaViolation::reprompt_with_error;
    cfg.retry.backoff.clear();
    for (const auto& ms : retry.at("backoff_ms"))
        cfg.retry.backoff.emplace_back(
            std::chrono::milliseconds(ms.get<std::int64_t>()));

    const auto& generation = j.at("generation");
    cfg.strategy = generation.at("strategy").get<std::string>();
    cfg.n_agents = generation.at("n").get<int>();
    cfg.overgeneration_factor = generation.at("overgeneration_factor").get<double>();
    cfg.serial_cap = generation.at("serial_cap").get<int>();
    if (generation.contains("steering_text"))
        cfg.steering_text = generation.at("steering_text").get<std::string>();
    for (const auto& item : generation.at("manual_agents"))
        cfg.manual_agents.emplace_back(item.at("name").get<std::string>(),
                                       item.at("description").get<std::string>());

    cfg.min_steps = j.at("experience").at("min_steps").get<int>();
    cfg.max_steps = j.at("experience").at("max_steps").get<int>();

    cfg.include_freestyle = j.at("interview").at("include_freestyle").get<bool>();
    for (const auto& q : j.at("interview").at("pool"))
        cfg.question_pool.push_back(interview::question_from_json(q));

    cfg.mode =
        domain::classification_mode_from_string(j.at("needs").at("mode").get<std::string>());
    cfg.criteria_text = j.at("needs").at("criteria_text").get<std::string>();
    cfg.dedup_needs = j.at("needs").at("dedup").get<bool>();

    cfg.hull_target_dim = j.at("metrics").at("hull_target_dim").get<int>();
    cfg.k_max = j.at("metrics").at("k_max").get<int>();
    cfg.cluster_themes = j.at("metrics").at("cluster_themes").get<bool>();

    cfg.pricing.input_price_per_1m =
        j.at("pricing").at("input_price_per_1m").get<double>();
    cfg.pricing.output_price_per_1m =
        j.at("pricing").at("output_price_per_1m").get<double>();

    cfg.seed = j.at("seed").get<std::int64_t>();
    cfg.max_in_flight = j.at("max_in_flight").get<int>();
    cfg.run_id = j.at("run_id").get<std::string>();
    cfg.prompt_overrides =
        j.at("prompt_overrides").get<std::map<std::string, std::string>>();
    cfg.deterministic_timestamps = j.at("deterministic_timestamps").get<bool>();
    validate(cfg);
    return cfg;
}

RunConfig resolve(const KeyValues& kv, const std::filesystem::path& base_dir) {
    RunConfig cfg;

    cfg.brief.product_name = kv.get_string("brief.product_name", "");
    cfg.brief.product_description = kv.get_string("brief.product_description", "");
    cfg.brief.categories = kv.get_strings("brief.categories", {});
    const std::string typical = kv.get_string("brief.typical_user_profile", "");
    if (!typical.empty()) cfg.brief.typical_user_profile = typical;

    cfg.provider_kind = kv.get_string("provider.kind", "mock");
    cfg.provider.base_url =
        kv.get_string("provider.base_url", "https://api.openai.com/v1");
    cfg.provider.chat_model = kv.get_string("provider.chat_model", "gpt-4-turbo");
    cfg.provider.embedding_model =
        kv.get_string("provider.embedding_model", "text-embedding-ada-002");
    cfg.provider.temperature = kv.get_double("provider.temperature", 1.0);
    cfg.provider.max_output_tokens =
        static_cast<int>(kv.get_int("provider.max_output_tokens", 4096));
    cfg.provider.request_timeout =
        std::chrono::milliseconds(kv.get_int("provider.request_timeout_ms", 60000));
    cfg.api_key_env = kv.get_string("provider.api_key_env", "ELICIT_API_KEY");
    cfg.mock_embedding_dim =
        static_cast<int>(kv.get_int("provider.mock_embedding_dim", 16));

    cfg.retry.max_attempts = static_cast<int>(kv.get_int("retry.max_attempts", 3));
    cfg.retry.on_schema_violation =
        kv.get_string("retry.on_schema_violation", "reprompt_with_error") == "fail"
            ? gw::OnSchemaViolation::fail
            : gw::OnSchemaViolation::reprompt_with_error;
    for (const auto& ms : kv.get_strings("retry.backoff_ms", {}))
        cfg.retry.backoff.emplace_back(std::chrono::milliseconds(std::stoll(ms)));

    cfg.strategy = kv.get_string("generation.strategy", "serial");
    cfg.n_agents = static_cast<int>(kv.get_int("generation.n", 20));
    cfg.overgeneration_factor = kv.get_double("generation.overgeneration_factor", 2.0);
    cfg.serial_cap = static_cast<int>(kv.get_int("generation.serial_cap", 20));

    // steering = "none" | "profile" (built from the brief's typical user) | a text file
    const std::string steering = kv.get_string("generation.steering", "none");
    if (steering == "profile") {
        if (!cfg.brief.typical_user_profile)
            throw config_error(
                "generation.steering=profile requires brief.typical_user_profile");
        cfg.steering_text = prompts::PromptStore::builtin().render(
            "steering", {{"typical_user", *cfg.brief.typical_user_profile}});
    } else if (steering != "none") {
        cfg.steering_text = util::read_file(base_dir / steering);
    }

    const std::string manual_file = kv.get_string("generation.manual_agents", "");
    if (!manual_file.empty()) {
        const auto parsed = nlohmann::json::parse(util::read_file(base_dir / manual_file));
        for (const auto& item : parsed)
            cfg.manual_agents.emplace_back(item.at("name").get<std::string>(),
                                           item.at("description").get<std::string>());
    }

    cfg.min_steps = static_cast<int>(kv.get_int("experience.min_steps", 3));
    cfg.max_steps = static_cast<int>(kv.get_int("experience.max_steps", 6));

    cfg.include_freestyle = kv.get_bool("interview.include_freestyle", true);
    const std::string pool = kv.get_string("interview.pool", "builtin");
    if (pool != "builtin") {
        const auto parsed = nlohmann::json::parse(util::read_file(base_dir / pool));
        for (const auto& q : parsed)
            cfg.question_pool.push_back(interview::question_from_json(q));
    }

    cfg.mode = domain::classification_mode_from_string(
        kv.get_string("needs.mode", "criteria_cot"));
    const std::string criteria_path = kv.get_string("needs.criteria", "");
    cfg.criteria_text = criteria_path.empty()
                            ? prompts::default_latent_criteria()
                            : util::read_file(base_dir / criteria_path);
    cfg.dedup_needs = kv.get_bool("needs.dedup", false);

    cfg.hull_target_dim = static_cast<int>(kv.get_int("metrics.hull_target_dim", 5));
    cfg.k_max = static_cast<int>(kv.get_int("metrics.k_max", 8));
    cfg.cluster_themes = kv.get_bool("metrics.cluster_themes", true);

    cfg.pricing.input_price_per_1m = kv.get_double("pricing.input_price_per_1m", 10.0);
    cfg.pricing.output_price_per_1m = kv.get_double("pricing.output_price_per_1m", 30.0);

    cfg.seed = kv.get_int("seed", 0);
    cfg.max_in_flight = static_cast<int>(kv.get_int("max_in_flight", 8));
    cfg.run_id = kv.get_string("run_id", "");

    const std::string prompt_dir = kv.get_string("prompt_dir", "");
    if (!prompt_dir.empty()) {
        const auto store = prompts::PromptStore::with_overrides(base_dir / prompt_dir);
        for (const auto& [name, text] : store.all()) {
            if (text != prompts::PromptStore::builtin().get(name))
                cfg.prompt_overrides[name] = text;
        }
    }

    cfg.deterministic_timestamps =
        kv.get_bool("deterministic_timestamps", cfg.provider_kind == "mock");

    validate(cfg);
    return cfg;
}

void validate(const RunConfig& cfg) {
    domain::validate(cfg.brief);
    if (cfg.provider_kind != "mock" && cfg.provider_kind != "http")
        throw config_error("provider.kind must be mock or http");
    if (cfg.strategy != "serial" && cfg.strategy != "parallel" &&
        cfg.strategy != "parallel_filtered" && cfg.strategy != "manual")
        throw config_error("generation.strategy must be serial, parallel, "
                           "parallel_filtered, or manual");
    if (cfg.strategy == "manual" && cfg.manual_agents.empty())
        throw config_error("generation.strategy=manual requires generation.manual_agents");
    if (cfg.n_agents < 1) throw config_error("generation.n must be positive");
    if (cfg.overgeneration_factor < 1.0)
        throw config_error("generation.overgeneration_factor must be >= 1");
    if (cfg.min_steps < 1 || cfg.min_steps > cfg.max_steps)
        throw config_error("experience requires 1 <= min_steps <= max_steps");
    if (cfg.mode != domain::ClassificationMode::zero_shot && cfg.criteria_text.empty())
        throw config_error("needs.criteria text required for criteria modes");
    if (cfg.hull_target_dim < 1) throw config_error("metrics.hull_target_dim must be >= 1");
    if (cfg.k_max < 2) throw config_error("metrics.k_max must be >= 2");
    if (cfg.max_in_flight < 1) throw config_error("max_in_flight must be >= 1");
    if (cfg.retry.max_attempts < 1) throw config_error("retry.max_attempts must be >= 1");
    eval::validate(cfg.pricing);
}

} // namespace elicit::config
