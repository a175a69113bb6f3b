#include "elicit/gateway.hpp"

#include "elicit/errors.hpp"
#include "elicit/util.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

namespace elicit::gw {

json LedgerEntry::to_json() const {
    return json{{"stage", stage},
                {"key", sort_key},
                {"kind", kind},
                {"prompt_hash", prompt_hash},
                {"model", model},
                {"attempts", attempts},
                {"input_tokens", input_tokens},
                {"output_tokens", output_tokens}};
}

LedgerEntry LedgerEntry::from_json(const json& j) {
    LedgerEntry e;
    e.stage = j.at("stage").get<std::string>();
    e.sort_key = j.at("key").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    e.prompt_hash = j.at("prompt_hash").get<std::string>();
    e.model = j.at("model").get<std::string>();
    e.attempts = j.at("attempts").get<int>();
    e.input_tokens = j.at("input_tokens").get<std::int64_t>();
    e.output_tokens = j.at("output_tokens").get<std::int64_t>();
    return e;
}

BufferingLedger::BufferingLedger(std::filesystem::path path) : path_(std::move(path)) {}

void BufferingLedger::append(LedgerEntry entry) {
    std::lock_guard lock(mutex_);
    pending_.push_back(std::move(entry));
}

void BufferingLedger::flush() {
    std::lock_guard lock(mutex_);
    if (pending_.empty()) return;
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const LedgerEntry& a, const LedgerEntry& b) {
                         if (a.stage != b.stage) return a.stage < b.stage;
                         return a.sort_key < b.sort_key;
                     });
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorCode::io, "cannot append to ledger: " + path_.string());
    for (const auto& e : pending_) {
        out << e.to_json().dump() << "\n";
        written_.push_back(e);
    }
    pending_.clear();
}

TokenUsage BufferingLedger::total_usage() const {
    std::lock_guard lock(mutex_);
    TokenUsage total;
    for (const auto& e : written_) total += {e.input_tokens, e.output_tokens};
    for (const auto& e : pending_) total += {e.input_tokens, e.output_tokens};
    return total;
}

std::vector<LedgerEntry> BufferingLedger::entries() const {
    std::lock_guard lock(mutex_);
    std::vector<LedgerEntry> all = written_;
    all.insert(all.end(), pending_.begin(), pending_.end());
    return all;
}

std::vector<LedgerEntry> BufferingLedger::read_all(const std::filesystem::path& path) {
    std::vector<LedgerEntry> entries;
    std::ifstream in(path);
    if (!in) return entries;
    std::string line;
    while (std::getline(in, line)) {
        if (util::trim(line).empty()) continue;
        entries.push_back(LedgerEntry::from_json(json::parse(line)));
    }
    return entries;
}

Gateway::Gateway(std::shared_ptr<Provider> provider, ProviderConfig config,
                 RetryPolicy policy, LedgerSink* ledger)
    : provider_(std::move(provider)),
      config_(std::move(config)),
      policy_(std::move(policy)),
      ledger_(ledger) {
    if (policy_.max_attempts < 1)
        throw ValidationError("RetryPolicy.max_attempts must be >= 1");
}

void Gateway::add_usage(const TokenUsage& usage) {
    std::lock_guard lock(usage_mutex_);
    cumulative_ += usage;
}

TokenUsage Gateway::cumulative_usage() const {
    std::lock_guard lock(usage_mutex_);
    return cumulative_;
}

StructuredResult Gateway::chat_structured(const ChatRequest& request) {
    if (request.user_turns.empty())
        throw ValidationError("chat_structured requires at least one user turn");

    const std::string system_with_schema =
        request.system_text + "\n\n" + schema::response_instructions(request.response_schema);

    ChatExchange exchange;
    exchange.system_text = system_with_schema;
    exchange.user_turns = request.user_turns;

    auto log_exchange = [&] {
        add_usage(exchange.usage);
        if (!ledger_) return;
        LedgerEntry entry;
        entry.stage = request.stage;
        entry.sort_key = request.sort_key;
        entry.kind = "chat";
        entry.prompt_hash = util::content_hash(
            system_with_schema + "\n" + util::join(request.user_turns, "\n"));
        entry.model = config_.chat_model;
        entry.attempts = exchange.attempts;
        entry.input_tokens = exchange.usage.input_tokens;
        entry.output_tokens = exchange.usage.output_tokens;
        ledger_->append(std::move(entry));
    };

    std::string last_error;
    for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
        if (attempt > 1 && !policy_.backoff.empty()) {
            const auto idx = std::min<std::size_t>(static_cast<std::size_t>(attempt - 2),
                                                   policy_.backoff.size() - 1);
            if (policy_.backoff[idx].count() > 0)
                std::this_thread::sleep_for(policy_.backoff[idx]);
        }

        ProviderChatCall call;
        call.system_text = system_with_schema;
        call.user_turns = exchange.user_turns;
        call.temperature = request.temperature.value_or(config_.temperature);
        call.max_output_tokens = config_.max_output_tokens;
        call.variant = request.variant;
        call.attempt = attempt;
        call.response_schema = &request.response_schema;

        const ProviderChatResult result = provider_->chat(call);
        exchange.raw_response = result.raw;
        exchange.usage += result.usage;
        exchange.attempts = attempt;

        const auto parsed = schema::extract_json(result.raw);
        std::optional<std::string> violation;
        if (!parsed) {
            violation = "response is not parseable JSON";
        } else {
            violation = request.response_schema.validate(*parsed);
        }

        if (!violation) {
            log_exchange();
            return StructuredResult{*parsed, std::move(exchange)};
        }

        last_error = *violation;
        if (policy_.on_schema_violation == OnSchemaViolation::fail) break;
        // Reprompt: surface the validator's complaint as a new user turn.
        exchange.user_turns.push_back(
            "Your previous response was invalid: " + last_error +
            ". Respond again with only a JSON value matching the required shape.");
    }

    log_exchange();
    throw SchemaExhausted("structured output invalid after " +
                              std::to_string(exchange.attempts) +
                              " attempt(s): " + last_error,
                          exchange.raw_response);
}

std::vector<StructuredResult> Gateway::chat_structured_batch(
    std::vector<ChatRequest> requests, std::size_t max_in_flight) {
    std::function<StructuredResult(std::size_t)> task =
        [this, &requests](std::size_t i) { return chat_structured(requests[i]); };
    return util::parallel_map<StructuredResult>(requests.size(), max_in_flight, task);
}

std::vector<domain::EmbeddingVector> Gateway::embed(
    const std::string& stage, const std::string& sort_key,
    const std::vector<std::string>& texts) {
    if (texts.empty())
        throw ValidationError("embed requires a non-empty list of texts");
    for (const auto& t : texts)
        if (t.empty()) throw ValidationError("embed texts must be non-empty");

    auto [vectors, usage] = provider_->embed(texts);
    if (vectors.size() != texts.size())
        throw Error(ErrorCode::dimension_mismatch,
                    "provider returned " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(texts.size()) + " texts");
    const std::size_t dim = vectors.front().dim();
    for (const auto& v : vectors) {
        domain::validate(v);
        if (v.dim() != dim)
            throw Error(ErrorCode::dimension_mismatch,
                        "provider returned ragged embedding dimensions");
    }
    add_usage(usage);
    if (ledger_) {
        LedgerEntry entry;
        entry.stage = stage;
        entry.sort_key = sort_key;
        entry.kind = "embed";
        entry.prompt_hash = util::content_hash(util::join(texts, "\n"));
        entry.model = config_.embedding_model;
        entry.attempts = 1;
        entry.input_tokens = usage.input_tokens;
        entry.output_tokens = usage.output_tokens;
        ledger_->append(std::move(entry));
    }
    return vectors;
}

} // namespace elicit::gw
