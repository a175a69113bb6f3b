#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace elicit::schema {

using json = nlohmann::json;

/// Minimal structured-record schema for model responses: objects with ordered
/// required fields, arrays with item bounds, strings (optionally non-empty or
/// enum-constrained), booleans and numbers. Field order is meaningful — it is
/// rendered into the prompt in declaration order, which is how
/// reasoning-before-verdict output is requested.
class Schema {
public:
    enum class Kind { string, boolean, integer, number, object, array };

    static Schema string(bool non_empty = true);
    static Schema string_enum(std::vector<std::string> values);
    static Schema boolean();
    static Schema integer();
    static Schema number();
    static Schema object(std::vector<std::pair<std::string, Schema>> fields);
    /// min_items/max_items: -1 means unbounded on that side.
    static Schema array(Schema items, long min_items = 0, long max_items = -1);

    Kind kind() const { return kind_; }
    bool non_empty() const { return non_empty_; }
    const std::vector<std::string>& enum_values() const { return enum_values_; }
    const std::vector<std::pair<std::string, Schema>>& fields() const { return fields_; }
    const Schema& items() const { return *items_; }
    long min_items() const { return min_items_; }
    long max_items() const { return max_items_; }

    /// Returns the first violation as "<path>: <problem>", or nullopt if valid.
    std::optional<std::string> validate(const json& value) const;

    /// Human/LLM-readable shape description embedded into system prompts.
    std::string render() const;

private:
    Kind kind_ = Kind::string;
    bool non_empty_ = true;
    std::vector<std::string> enum_values_;
    std::vector<std::pair<std::string, Schema>> fields_;
    std::shared_ptr<const Schema> items_;
    long min_items_ = 0;
    long max_items_ = -1;

    void validate_into(const json& value, const std::string& path,
                       std::optional<std::string>& error) const;
    void render_into(std::string& out, int indent) const;
};

/// Full response instructions wrapped around a schema, appended to system text.
std::string response_instructions(const Schema& schema);

/// Extracts the JSON payload from a raw model response: strips code fences
/// and leading/trailing prose around the outermost JSON value.
std::optional<json> extract_json(const std::string& raw);

} // namespace elicit::schema
