#include "elicit/schema.hpp"

#include <sstream>

namespace elicit::schema {

Schema Schema::string(bool non_empty) {
    Schema s;
    s.kind_ = Kind::string;
    s.non_empty_ = non_empty;
    return s;
}

Schema Schema::string_enum(std::vector<std::string> values) {
    Schema s;
    s.kind_ = Kind::string;
    s.enum_values_ = std::move(values);
    return s;
}

Schema Schema::boolean() {
    Schema s;
    s.kind_ = Kind::boolean;
    return s;
}

Schema Schema::integer() {
    Schema s;
    s.kind_ = Kind::integer;
    return s;
}

Schema Schema::number() {
    Schema s;
    s.kind_ = Kind::number;
    return s;
}

Schema Schema::object(std::vector<std::pair<std::string, Schema>> fields) {
    Schema s;
    s.kind_ = Kind::object;
    s.fields_ = std::move(fields);
    return s;
}

Schema Schema::array(Schema items, long min_items, long max_items) {
    Schema s;
    s.kind_ = Kind::array;
    s.items_ = std::make_shared<const Schema>(std::move(items));
    s.min_items_ = min_items;
    s.max_items_ = max_items;
    return s;
}

std::optional<std::string> Schema::validate(const json& value) const {
    std::optional<std::string> error;
    validate_into(value, "$", error);
    return error;
}

void Schema::validate_into(const json& value, const std::string& path,
                           std::optional<std::string>& error) const {
    if (error) return;
    switch (kind_) {
        case Kind::string: {
            if (!value.is_string()) {
                error = path + ": expected a string";
                return;
            }
            const auto s = value.get<std::string>();
            if (non_empty_ && s.empty()) {
                error = path + ": string must be non-empty";
                return;
            }
            if (!enum_values_.empty()) {
                for (const auto& allowed : enum_values_)
                    if (s == allowed) return;
                error = path + ": value '" + s + "' not one of the allowed options";
            }
            return;
        }
        case Kind::boolean:
            if (!value.is_boolean()) error = path + ": expected true or false";
            return;
        case Kind::integer:
            if (!value.is_number_integer()) error = path + ": expected an integer";
            return;
        case Kind::number:
            if (!value.is_number()) error = path + ": expected a number";
            return;
        case Kind::object: {
            if (!value.is_object()) {
                error = path + ": expected an object";
                return;
            }
            for (const auto& [name, field] : fields_) {
                if (!value.contains(name)) {
                    error = path + ": missing required field '" + name + "'";
                    return;
                }
                field.validate_into(value.at(name), path + "." + name, error);
                if (error) return;
            }
            return;
        }
        case Kind::array: {
            if (!value.is_array()) {
                error = path + ": expected an array";
                return;
            }
            const long n = static_cast<long>(value.size());
            if (min_items_ >= 0 && n < min_items_) {
                error = path + ": expected at least " + std::to_string(min_items_) +
                        " items, got " + std::to_string(n);
                return;
            }
            if (max_items_ >= 0 && n > max_items_) {
                error = path + ": expected at most " + std::to_string(max_items_) +
                        " items, got " + std::to_string(n);
                return;
            }
            for (long i = 0; i < n; ++i) {
                items_->validate_into(value.at(static_cast<std::size_t>(i)),
                                      path + "[" + std::to_string(i) + "]", error);
                if (error) return;
            }
            return;
        }
    }
}

std::string Schema::render() const {
    std::string out;
    render_into(out, 0);
    return out;
}

void Schema::render_into(std::string& out, int indent) const {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    switch (kind_) {
        case Kind::string:
            if (!enum_values_.empty()) {
                out += "\"<one of: ";
                for (std::size_t i = 0; i < enum_values_.size(); ++i) {
                    if (i > 0) out += " | ";
                    out += enum_values_[i];
                }
                out += ">\"";
            } else {
                out += non_empty_ ? "\"<non-empty string>\"" : "\"<string>\"";
            }
            return;
        case Kind::boolean:
            out += "<true|false>";
            return;
        case Kind::integer:
            out += "<integer>";
            return;
        case Kind::number:
            out += "<number>";
            return;
        case Kind::object: {
            out += "{\n";
            for (std::size_t i = 0; i < fields_.size(); ++i) {
                out += pad + "  \"" + fields_[i].first + "\": ";
                fields_[i].second.render_into(out, indent + 1);
                if (i + 1 < fields_.size()) out += ",";
                out += "\n";
            }
            out += pad + "}";
            return;
        }
        case Kind::array: {
            out += "[";
            items_->render_into(out, indent);
            out += ", ...]";
            if (min_items_ >= 0 && min_items_ == max_items_) {
                out += " (exactly " + std::to_string(min_items_) + " items)";
            } else {
                if (min_items_ > 0) out += " (at least " + std::to_string(min_items_) + " items";
                if (max_items_ >= 0) {
                    out += min_items_ > 0 ? ", " : " (";
                    out += "at most " + std::to_string(max_items_) + " items";
                }
                if (min_items_ > 0 || max_items_ >= 0) out += ")";
            }
            return;
        }
    }
}

std::string response_instructions(const Schema& schema) {
    std::ostringstream out;
    out << "Respond with a single JSON value matching exactly this shape, "
           "with the fields in the order shown:\n"
        << schema.render()
        << "\nOutput only the JSON value. No prose, no markdown fences, no "
           "additional keys.";
    return out.str();
}

std::optional<json> extract_json(const std::string& raw) {
    std::string text = raw;
    // Strip markdown fences if the model wrapped its output.
    const auto fence = text.find("```");
    if (fence != std::string::npos) {
        auto start = text.find('\n', fence);
        if (start != std::string::npos) {
            auto end = text.find("```", start);
            if (end != std::string::npos) text = text.substr(start + 1, end - start - 1);
        }
    }
    const auto first_obj = text.find_first_of("{[");
    if (first_obj == std::string::npos) return std::nullopt;
    const auto last_obj = text.find_last_of("}]");
    if (last_obj == std::string::npos || last_obj < first_obj) return std::nullopt;
    const auto parsed = json::parse(text.substr(first_obj, last_obj - first_obj + 1),
                                    nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

} // namespace elicit::schema
