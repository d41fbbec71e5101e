#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lloom {

enum class TemplateId { Filter, Summarize, Synthesize, Score, CoverageMatch, SyntheticGen, Merge, Split };

std::string_view to_string(TemplateId id);
TemplateId template_id_from_string(std::string_view s);
const std::vector<TemplateId>& all_template_ids();

using TemplateParams = std::map<std::string, std::string>;

/// Built-in template body. Placeholders are `{name}`; literal braces are
/// doubled (`{{`, `}}`).
const std::string& default_template(TemplateId id);

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view body);

/// The literal text between placeholders, with brace escapes resolved.
std::vector<std::string> fixed_segments(std::string_view body);

/// "related to {seed_term}" or "" when no seed term is set.
std::string seed_phrase(const std::optional<std::string>& seed_term);

/// Substitutes `params` into `body`. `seed_phrase` is derived from
/// `seed_term` when not given explicitly; `seed_phrase` and `n_quotes` may be
/// absent (rendered empty). Any other missing placeholder throws
/// TemplateError("missing placeholder <name>").
std::string render_template(std::string_view body, const TemplateParams& params);

class TemplateSet {
public:
    TemplateSet() = default;

    /// Loads `<template_id>.txt` files from `dir`, overriding built-ins.
    static TemplateSet from_directory(const std::filesystem::path& dir);

    void set_override(TemplateId id, std::string body);
    const std::string& body(TemplateId id) const;
    std::string render(TemplateId id, const TemplateParams& params) const;

private:
    std::map<TemplateId, std::string> overrides_;
};

/// Renders a built-in template.
std::string render_prompt(TemplateId id, const TemplateParams& params);

} // namespace lloom
