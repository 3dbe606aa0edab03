#include "cfdx/prompts.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cfdx/hash.hpp"
#include "cfdx/text.hpp"

namespace cfdx {

namespace {

bool is_name_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

// Calls fn(begin, end, name) for each {name} placeholder, in order.
template <typename Fn>
void for_each_placeholder(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    std::size_t j = pos + 1;
    if (j < text.size() && is_name_start(text[j])) {
      while (j < text.size() && is_name_char(text[j])) ++j;
      if (j < text.size() && text[j] == '}') {
        fn(pos, j + 1, text.substr(pos + 1, j - pos - 1));
        pos = j + 1;
        continue;
      }
    }
    ++pos;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PromptTemplate PromptTemplate::from_body(std::string id, std::string body) {
  PromptTemplate t{std::move(id), std::move(body), {}};
  for_each_placeholder(t.body, [&](std::size_t, std::size_t, std::string_view name) {
    t.required_vars.emplace(name);
  });
  return t;
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl, const TemplateVars& vars) {
  RenderedPrompt out;
  for (const auto& name : tmpl.required_vars) {
    if (!vars.contains(name)) throw Error(ErrorKind::MissingVar, name);
  }
  for (const auto& [name, _] : vars) {
    if (!tmpl.required_vars.contains(name)) {
      out.warnings.push_back({"UnknownVar", tmpl.id + ": " + name});
    }
  }
  std::string_view body = tmpl.body;
  std::size_t last = 0;
  for_each_placeholder(body, [&](std::size_t begin, std::size_t end, std::string_view name) {
    out.text.append(body.substr(last, begin - last));
    out.text += vars.at(std::string(name));
    last = end;
  });
  out.text.append(body.substr(last));
  return out;
}

std::vector<std::string> unresolved_placeholders(std::string_view text) {
  std::vector<std::string> names;
  for_each_placeholder(text, [&](std::size_t, std::size_t, std::string_view name) {
    names.emplace_back(name);
  });
  return names;
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::FileNotFound, dir.string());
  TemplateStore store;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const std::string id = entry.path().stem().string();
    std::string body = read_file(entry.path());
    store.checksums_[id] = sha256_hex(body);
    store.templates_.emplace(id, PromptTemplate::from_body(id, std::move(body)));
  }
  return store;
}

const PromptTemplate& TemplateStore::get(const std::string& id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorKind::FileNotFound, "prompt template '" + id + "'");
  return it->second;
}

bool TemplateStore::contains(const std::string& id) const { return templates_.contains(id); }

void TemplateStore::override_template(const std::string& id, std::string body) {
  checksums_[id] = sha256_hex(body);
  templates_.insert_or_assign(id, PromptTemplate::from_body(id, std::move(body)));
}

SpecialistPool SpecialistPool::from_json_text(std::string_view text) {
  SpecialistPool pool;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& group : doc.at("categories")) {
      const auto category = group.at("category").get<std::string>();
      for (const auto& name : group.at("specialists")) {
        pool.roles_.push_back({name.get<std::string>(), category});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("specialist pool: ") + e.what());
  }
  pool.checksum_ = sha256_hex(text);
  return pool;
}

SpecialistPool SpecialistPool::load(const std::filesystem::path& path) {
  return from_json_text(read_file(path));
}

std::vector<std::string> SpecialistPool::categories() const {
  std::vector<std::string> out;
  for (const auto& r : roles_) {
    if (out.empty() || out.back() != r.category) out.push_back(r.category);
  }
  return out;
}

std::optional<SpecialistRole> SpecialistPool::find(std::string_view name) const {
  const std::string wanted = ascii_lower(trim(name));
  for (const auto& r : roles_) {
    if (ascii_lower(r.name) == wanted) return r;
  }
  return std::nullopt;
}

std::string SpecialistPool::listing() const {
  std::string out;
  for (const auto& category : categories()) {
    out += category + ": ";
    bool first = true;
    for (const auto& r : roles_) {
      if (r.category != category) continue;
      if (!first) out += ", ";
      out += r.name;
      first = false;
    }
    out += "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace cfdx
