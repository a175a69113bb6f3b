#include "elicit/mock_provider.hpp"

#include "elicit/util.hpp"

#include <array>
#include <cmath>

namespace elicit::gw {

namespace {

constexpr std::array<const char*, 20> kAdjectives = {
    "Resourceful", "Cautious",  "Adventurous", "Practical",  "Meticulous",
    "Spirited",    "Seasoned",  "Curious",     "Hardy",      "Inventive",
    "Patient",     "Restless",  "Frugal",      "Gregarious", "Solitary",
    "Vigilant",    "Easygoing", "Determined",  "Nocturnal",  "Weathered"};

constexpr std::array<const char*, 20> kRoles = {
    "Trailblazer", "Caretaker",  "Navigator",  "Scout",      "Artisan",
    "Ranger",      "Naturalist", "Wanderer",   "Organizer",  "Tinkerer",
    "Chronicler",  "Forager",    "Stargazer",  "Cartographer", "Herbalist",
    "Outfitter",   "Drifter",    "Surveyor",   "Keeper",     "Pathfinder"};

constexpr std::array<const char*, 12> kActivities = {
    "long-distance treks",      "overnight field work",  "family excursions",
    "storm-season campouts",    "river crossings",       "high-altitude routes",
    "desert traverses",         "winter expeditions",    "coastal walks",
    "festival weekends",        "wildlife surveys",      "remote research trips"};

constexpr std::array<const char*, 10> kConcerns = {
    "grip strength",  "visibility at night", "pack weight",   "setup time",
    "weather sealing", "ventilation",        "anchoring",     "storage space",
    "repairability",  "cold-weather comfort"};

// splitmix64: cheap, well-distributed stream from a 64-bit state.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct ValueRng {
    std::uint64_t state;
    std::uint64_t next() { return splitmix64(state); }
    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(next() % n); }
};

std::string prompt_text(const ProviderChatCall& call) {
    return call.system_text + "\n" + util::join(call.user_turns, "\n");
}

json generate_value(const schema::Schema& s, const std::string& field,
                    std::uint64_t seed, std::uint64_t name_salt,
                    std::uint64_t prompt_hash, const std::string& path);

json generate_object(const schema::Schema& s, std::uint64_t seed,
                     std::uint64_t name_salt, std::uint64_t prompt_hash,
                     const std::string& path) {
    json obj = json::object();
    for (const auto& [name, field_schema] : s.fields()) {
        obj[name] = generate_value(field_schema, name, seed, name_salt, prompt_hash,
                                   path + "." + name);
    }
    return obj;
}

std::string generate_text(const std::string& field, std::uint64_t seed,
                          std::uint64_t name_salt, std::uint64_t prompt_hash,
                          const std::string& path) {
    // Names come from a fixed pool indexed by an injective salt so that every
    // agent-generation call in a run yields a distinct name.
    if (field == "name") {
        const std::uint64_t idx = (seed * 7 + name_salt) % (kAdjectives.size() * kRoles.size());
        return std::string(kAdjectives[idx % kAdjectives.size()]) + " " +
               kRoles[(idx / kAdjectives.size()) % kRoles.size()];
    }

    ValueRng rng{util::fnv1a64(path + "|" + std::to_string(seed) + "|" +
                               std::to_string(name_salt) + "|" +
                               util::to_hex(prompt_hash))};
    const std::string activity = kActivities[rng.pick(kActivities.size())];
    const std::string concern = kConcerns[rng.pick(kConcerns.size())];
    const std::string tag = util::to_hex(rng.next()).substr(8);

    if (field == "description")
        return "A user who favors " + activity + " and pays close attention to " +
               concern + ".";
    if (field == "reasoning")
        return "Included to cover " + activity + " where " + concern +
               " becomes a deciding factor.";
    if (field == "action")
        return "Tried the product during " + activity + " while managing " + concern +
               " (" + tag + ").";
    if (field == "observation")
        return "Noticed how " + concern + " shaped the experience during " + activity +
               " (" + tag + ").";
    if (field == "challenge")
        return "Struggled with " + concern + " under the conditions of " + activity +
               " (" + tag + ").";
    if (field == "answer")
        return "For " + activity + " I would want the design to account for " + concern +
               "; a tailored option here would make a real difference (" + tag + ").";
    if (field == "theme" || field == "themes")
        return "Theme: " + activity + " (" + tag + ")";
    if (field == "need" || field == "needs")
        return "A design change addressing " + concern + " during " + activity + " (" +
               tag + ")";
    return "sample " + field + " " + tag;
}

json generate_value(const schema::Schema& s, const std::string& field,
                    std::uint64_t seed, std::uint64_t name_salt,
                    std::uint64_t prompt_hash, const std::string& path) {
    using Kind = schema::Schema::Kind;
    ValueRng rng{util::fnv1a64(path + "#" + std::to_string(seed) + "#" +
                               std::to_string(name_salt) + "#" +
                               util::to_hex(prompt_hash))};
    switch (s.kind()) {
        case Kind::string:
            if (!s.enum_values().empty())
                return s.enum_values()[rng.pick(s.enum_values().size())];
            return generate_text(field, seed, name_salt, prompt_hash, path);
        case Kind::boolean:
            return rng.next() % 2 == 0;
        case Kind::integer:
            return static_cast<int>(rng.pick(7)) + 1;
        case Kind::number:
            return static_cast<double>(rng.pick(1000)) / 100.0;
        case Kind::object:
            return generate_object(s, seed, name_salt, prompt_hash, path);
        case Kind::array: {
            long n;
            if (s.min_items() >= 0 && s.min_items() == s.max_items()) {
                n = s.min_items();
            } else {
                const long lo = std::max<long>(s.min_items(), 0);
                const long hi = s.max_items() >= 0 ? s.max_items() : lo + 2;
                n = lo + static_cast<long>(rng.pick(static_cast<std::size_t>(hi - lo + 1)));
            }
            json arr = json::array();
            for (long i = 0; i < n; ++i) {
                // Offset the name salt per item so arrays of agents get
                // distinct names from the pool.
                arr.push_back(generate_value(s.items(), field, seed,
                                             name_salt + static_cast<std::uint64_t>(i),
                                             prompt_hash,
                                             path + "[" + std::to_string(i) + "]"));
            }
            return arr;
        }
    }
    return json();
}

} // namespace

MockProvider::MockProvider(std::uint64_t seed, std::vector<std::string> script,
                           int embedding_dim)
    : seed_(seed), embedding_dim_(embedding_dim), script_(std::move(script)) {}

void MockProvider::set_responder(Responder responder) {
    std::lock_guard lock(mutex_);
    responder_ = std::move(responder);
}

ProviderChatResult MockProvider::chat(const ProviderChatCall& call) {
    std::optional<std::string> served;
    {
        std::lock_guard lock(mutex_);
        if (responder_) served = responder_(call);
        if (!served && script_next_ < script_.size()) served = script_[script_next_++];
    }
    const std::string raw = served ? *served : generate(call);

    ProviderChatResult result;
    result.raw = raw;
    result.usage.input_tokens = static_cast<std::int64_t>(prompt_text(call).size() / 4);
    result.usage.output_tokens = static_cast<std::int64_t>(raw.size() / 4);

    std::lock_guard lock(mutex_);
    calls_.push_back(RecordedCall{call.system_text, call.user_turns, call.temperature,
                                  call.variant, call.attempt, raw});
    return result;
}

std::string MockProvider::generate(const ProviderChatCall& call) const {
    if (call.response_schema == nullptr) return "{}";
    // Salt layout keeps pool-name choices injective across a run: variants are
    // spaced by 131 (coprime to the 400-name pool) and retry attempts by 173.
    const std::uint64_t name_salt =
        call.variant * 131 + static_cast<std::uint64_t>(call.attempt - 1) * 173;
    const std::uint64_t prompt_hash = util::fnv1a64(
        prompt_text(call) + "|v" + std::to_string(call.variant) + "|a" +
        std::to_string(call.attempt));
    const json value =
        generate_value(*call.response_schema, "", seed_, name_salt, prompt_hash, "$");
    return value.dump();
}

ProviderEmbedResult MockProvider::embed(const std::vector<std::string>& texts) {
    ProviderEmbedResult result;
    result.vectors.reserve(texts.size());
    for (const auto& t : texts) {
        result.vectors.push_back(embedding_for(t, embedding_dim_));
        result.usage.input_tokens += static_cast<std::int64_t>(t.size() / 4);
    }
    std::lock_guard lock(mutex_);
    ++embed_calls_;
    return result;
}

domain::EmbeddingVector MockProvider::embedding_for(const std::string& text, int dim) {
    domain::EmbeddingVector vec;
    vec.values.reserve(static_cast<std::size_t>(dim));
    std::uint64_t state = util::fnv1a64(text);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int i = 0; i < dim; ++i) {
        const std::uint64_t bits = splitmix64(state);
        // Map to [-1, 1], then shrink so the full vector lies in the unit ball.
        const double u =
            (static_cast<double>(bits >> 11) / 9007199254740992.0) * 2.0 - 1.0;
        vec.values.push_back(u * scale);
    }
    return vec;
}

std::vector<MockProvider::RecordedCall> MockProvider::recorded_calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t MockProvider::chat_call_count() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

std::size_t MockProvider::embed_call_count() const {
    std::lock_guard lock(mutex_);
    return embed_calls_;
}

} // namespace elicit::gw
