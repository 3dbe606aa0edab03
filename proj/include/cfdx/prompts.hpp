#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cfdx/error.hpp"

namespace cfdx {

// A text body with {name} placeholders (lowercase identifiers). Other braces,
// such as JSON examples in the body, are literal text.
struct PromptTemplate {
  std::string id;
  std::string body;
  std::set<std::string> required_vars;

  [[nodiscard]] static PromptTemplate from_body(std::string id, std::string body);
};

using TemplateVars = std::map<std::string, std::string>;

struct RenderedPrompt {
  std::string text;
  Warnings warnings;
};

// Single-pass substitution: substituted values are never re-expanded.
// Throws MissingVar naming the first absent placeholder; extra vars produce an
// UnknownVar warning.
[[nodiscard]] RenderedPrompt render_prompt(const PromptTemplate& tmpl, const TemplateVars& vars);

// Placeholder names still present in `text`.
[[nodiscard]] std::vector<std::string> unresolved_placeholders(std::string_view text);

// Immutable after load. Each asset file `<id>.txt` becomes template `id`.
class TemplateStore {
 public:
  static TemplateStore load(const std::filesystem::path& dir);

  [[nodiscard]] const PromptTemplate& get(const std::string& id) const;
  [[nodiscard]] bool contains(const std::string& id) const;
  [[nodiscard]] const std::map<std::string, std::string>& checksums() const noexcept {
    return checksums_;
  }

  // Replaces a template body (config-visible override) and its checksum.
  void override_template(const std::string& id, std::string body);

 private:
  std::map<std::string, PromptTemplate> templates_;
  std::map<std::string, std::string> checksums_;
};

struct SpecialistRole {
  std::string name;
  std::string category;

  bool operator==(const SpecialistRole&) const = default;
};

class SpecialistPool {
 public:
  static SpecialistPool load(const std::filesystem::path& path);
  static SpecialistPool from_json_text(std::string_view text);

  [[nodiscard]] const std::vector<SpecialistRole>& roles() const noexcept { return roles_; }
  [[nodiscard]] std::vector<std::string> categories() const;
  // Canonical pool entry for `name` (case-insensitive, trimmed), if any.
  [[nodiscard]] std::optional<SpecialistRole> find(std::string_view name) const;
  // "Category: a, b, c" lines, one per category, in asset order.
  [[nodiscard]] std::string listing() const;
  [[nodiscard]] const std::string& checksum() const noexcept { return checksum_; }

 private:
  std::vector<SpecialistRole> roles_;
  std::string checksum_;
};

inline constexpr std::string_view kIndependentClinician = "Independent Clinician";
inline constexpr std::string_view kFallbackSpecialist = "General Internal Medicine Doctor";

}  // namespace cfdx
