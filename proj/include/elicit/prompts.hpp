#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace elicit::prompts {

/// Named prompt templates with {placeholder} substitution. Defaults are
/// compiled in and mirrored by the editable files under assets/prompts/; a
/// directory override replaces any subset of them without recompiling.
class PromptStore {
public:
    static const PromptStore& builtin();

    /// Builtins overlaid with <dir>/<name>.txt for every known template name.
    static PromptStore with_overrides(const std::filesystem::path& dir);

    /// Store built from an explicit name -> text map (plus builtin fallback).
    static PromptStore from_map(std::map<std::string, std::string> texts);

    const std::string& get(const std::string& name) const;
    bool has(const std::string& name) const;
    std::string render(const std::string& name,
                       const std::vector<std::pair<std::string, std::string>>& values) const;
    const std::map<std::string, std::string>& all() const { return texts_; }

private:
    std::map<std::string, std::string> texts_;
};

/// Default latent-need criteria block (also shipped as assets/latent_criteria.txt).
const std::string& default_latent_criteria();

} // namespace elicit::prompts
