#include "automt/config.hpp"

#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <set>

namespace automt::config
{

using nlohmann::json;

namespace
{

std::string strip_comment(std::string_view line)
{
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') quoted = !quoted;
    if (c == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

std::string unquote(std::string_view value, std::size_t line_no)
{
  std::string out;
  for (std::size_t i = 1; i < value.size(); ++i) {
    char c = value[i];
    if (c == '"') {
      if (!text::trim(value.substr(i + 1)).empty()) {
        throw ConfigError("line " + std::to_string(line_no) + ": trailing text after string");
      }
      return out;
    }
    if (c == '\\' && i + 1 < value.size()) {
      char e = value[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ConfigError("line " + std::to_string(line_no) + ": unknown escape \\" + std::string(1, e));
      }
      continue;
    }
    out += c;
  }
  throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
}

json parse_value(std::string_view raw, std::size_t line_no)
{
  auto v = text::trim(raw);
  if (v.empty()) throw ConfigError("line " + std::to_string(line_no) + ": missing value");
  if (v.front() == '"') return unquote(v, line_no);
  if (v == "true") return true;
  if (v == "false") return false;
  std::int64_t i = 0;
  auto [iptr, iec] = std::from_chars(v.data(), v.data() + v.size(), i);
  if (iec == std::errc() && iptr == v.data() + v.size()) return i;
  double d = 0.0;
  auto [dptr, dec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (dec == std::errc() && dptr == v.data() + v.size()) return d;
  throw ConfigError("line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
}

std::string as_string(const json & v, const std::string & key)
{
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

double as_real(const json & v, const std::string & key)
{
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t as_count(const json & v, const std::string & key)
{
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool valid_key(std::string_view key)
{
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

void assign(RunConfig & cfg, const std::string & section, const std::string & key, const json & v)
{
  const auto full = section.empty() ? key : section + "." + key;
  if (section.empty()) {
    if (key == "region") cfg.region = as_string(v, full);
    else if (key == "taxonomy") cfg.taxonomy = as_string(v, full);
    else if (key == "rules") cfg.rules = as_string(v, full);
    else if (key == "corpus") cfg.corpus = as_string(v, full);
    else if (key == "output") cfg.output = as_string(v, full);
    else if (key == "parallel") cfg.parallel = as_count(v, full);
    else if (key == "seed") cfg.seed = as_count(v, full);
    else if (key == "system_name") cfg.system_name = as_string(v, full);
    else if (key == "label") cfg.label = as_string(v, full);
    else if (key == "frame_cap") cfg.frame_cap = as_count(v, full);
    else if (key == "sign_convention") cfg.sign_convention = as_string(v, full);
    else throw ConfigError("unknown key '" + full + "'");
  } else if (section == "thresholds") {
    if (key == "acceptance_score") cfg.thresholds.acceptance_score = as_real(v, full);
    else if (key == "v_min") cfg.thresholds.v_min = as_real(v, full);
    else if (key == "epsilon") cfg.thresholds.epsilon = as_real(v, full);
    else if (key == "band_k") cfg.thresholds.band_k = as_real(v, full);
    else if (key == "top_k") cfg.thresholds.top_k = as_count(v, full);
    else throw ConfigError("unknown key '" + full + "'");
  } else if (section == "backends") {
    const auto & roles = backend_roles();
    if (std::none_of(roles.begin(), roles.end(), [&](const auto & r) { return r.first == key; })) {
      throw ConfigError("unknown backend role '" + key + "'");
    }
    cfg.backends[key] = as_string(v, full);
  } else if (section == "parsers" || section == "ads") {
    auto & list = section == "parsers" ? cfg.parsers : cfg.ads;
    list.emplace_back(key, as_string(v, full));
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

std::string quote(std::string_view value)
{
  std::string out = "\"";
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string real(double v)
{
  auto s = json(v).dump();
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

void set_named(std::vector<NamedUrl> & list, const std::string & name, const std::string & url, const char * what)
{
  for (auto & [n, u] : list) {
    if (n == name) {
      u = url;
      return;
    }
  }
  throw ConfigError(std::string("no ") + what + " named '" + name + "'");
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string & path) const
{
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  return base_dir / p;
}

bool RunConfig::all_mock() const
{
  auto mock = [](const std::string & url) { return url.rfind("mock:", 0) == 0; };
  for (const auto & [role, url] : backends) {
    if (!mock(url)) return false;
  }
  for (const auto & [name, url] : parsers) {
    if (!mock(url)) return false;
  }
  for (const auto & [name, url] : ads) {
    if (!mock(url)) return false;
  }
  return true;
}

const std::vector<std::pair<std::string, backends::BackendKind>> & backend_roles()
{
  using backends::BackendKind;
  static const std::vector<std::pair<std::string, BackendKind>> roles{
    {"chat", BackendKind::Chat},   {"vision", BackendKind::Vision}, {"embed", BackendKind::Embed},
    {"edit", BackendKind::Edit},   {"video", BackendKind::Video},   {"validator", BackendKind::Chat}};
  return roles;
}

RunConfig parse_config(std::string_view text_in, const std::filesystem::path & base_dir)
{
  RunConfig cfg;
  cfg.base_dir = base_dir;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto & raw : text::split_lines(text_in)) {
    ++line_no;
    auto line = text::trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = text::trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_key(section)) throw ConfigError("line " + std::to_string(line_no) + ": bad section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    auto key = text::trim(std::string_view(line).substr(0, eq));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (!valid_key(key)) throw ConfigError("line " + std::to_string(line_no) + ": bad key '" + key + "'");
    auto full = section + "." + key;
    if (!seen.insert(full).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    assign(cfg, section, key, parse_value(std::string_view(line).substr(eq + 1), line_no));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path & path)
{
  auto text_in = io::read_file(path);
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(text_in, base);
}

void apply_environment(RunConfig & cfg)
{
  using backends::BackendKind;
  auto env = [](BackendKind kind) -> std::optional<std::string> {
    auto name = "AUTOMT_BACKEND_" + text::to_lower(backends::to_string(kind)) + "_URL";
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    const char * value = std::getenv(name.c_str());
    if (!value || !*value) return std::nullopt;
    return std::string(value);
  };
  if (auto url = env(BackendKind::Chat)) {
    cfg.backends["chat"] = *url;
    cfg.backends["validator"] = *url;
    for (auto & parser : cfg.parsers) parser.second = *url;
  }
  for (auto [role, kind] : {std::pair{"vision", BackendKind::Vision}, std::pair{"embed", BackendKind::Embed},
                            std::pair{"edit", BackendKind::Edit}, std::pair{"video", BackendKind::Video}}) {
    if (auto url = env(kind)) cfg.backends[role] = *url;
  }
  if (auto url = env(BackendKind::Predict)) {
    for (auto & a : cfg.ads) a.second = *url;
  }
  if (const char * seed = std::getenv("AUTOMT_MOCK_SEED"); seed && *seed) {
    std::string_view s(seed);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("AUTOMT_MOCK_SEED must be an integer");
    cfg.seed = v;
  }
}

void apply_backend_overrides(RunConfig & cfg, std::string_view table)
{
  for (const auto & item : text::split(table, ',')) {
    auto entry = text::trim(item);
    if (entry.empty()) continue;
    auto eq = entry.find('=');
    if (eq == std::string::npos) throw UsageError("--backends entry '" + entry + "' is not role=url");
    auto role = text::trim(std::string_view(entry).substr(0, eq));
    auto url = text::trim(std::string_view(entry).substr(eq + 1));
    if (role.rfind("parser.", 0) == 0) {
      set_named(cfg.parsers, role.substr(7), url, "parser profile");
    } else if (role.rfind("ads.", 0) == 0) {
      set_named(cfg.ads, role.substr(4), url, "ADS");
    } else {
      const auto & roles = backend_roles();
      if (std::none_of(roles.begin(), roles.end(), [&](const auto & r) { return r.first == role; })) {
        throw UsageError("unknown backend role '" + role + "'");
      }
      cfg.backends[role] = url;
    }
  }
}

void select_parsers(RunConfig & cfg, std::string_view names)
{
  std::vector<NamedUrl> chosen;
  for (const auto & item : text::split(names, ',')) {
    auto name = text::trim(item);
    if (name.empty()) continue;
    auto it = std::find_if(cfg.parsers.begin(), cfg.parsers.end(), [&](const auto & p) { return p.first == name; });
    if (it == cfg.parsers.end()) throw UsageError("no parser profile named '" + name + "'");
    chosen.push_back(*it);
  }
  if (chosen.empty()) throw UsageError("--parsers selected no profile");
  cfg.parsers = std::move(chosen);
}

void validate(const RunConfig & cfg)
{
  const auto & t = cfg.thresholds;
  if (!(t.acceptance_score >= 0.0 && t.acceptance_score <= 1.0)) {
    throw ConfigError("thresholds.acceptance_score must lie in [0, 1]");
  }
  if (!(t.v_min >= 0.0) || !std::isfinite(t.v_min)) throw ConfigError("thresholds.v_min must be >= 0");
  if (!(t.epsilon >= 0.0) || !std::isfinite(t.epsilon)) throw ConfigError("thresholds.epsilon must be >= 0");
  if (!(t.band_k >= 0.0) || !std::isfinite(t.band_k)) throw ConfigError("thresholds.band_k must be >= 0");
  if (t.top_k < 1) throw ConfigError("thresholds.top_k must be >= 1");
  if (cfg.parallel < 1) throw ConfigError("parallel must be >= 1");
  if (cfg.frame_cap < 1) throw ConfigError("frame_cap must be >= 1");
  if (cfg.sign_convention != "left_positive" && cfg.sign_convention != "left_negative") {
    throw ConfigError("sign_convention must be left_positive or left_negative");
  }
  if (cfg.system_name.empty() || cfg.system_name.find_first_of(" \t\r\n") != std::string::npos) {
    throw ConfigError("system_name must be a single token");
  }
  for (const auto & [role, kind] : backend_roles()) {
    if (!cfg.backends.count(role) || cfg.backends.at(role).empty()) {
      throw ConfigError("missing backend url for role '" + role + "'");
    }
  }
  std::set<std::string> names;
  for (const auto & [name, url] : cfg.ads) {
    if (!names.insert(name).second) throw ConfigError("duplicate ADS '" + name + "'");
  }
  names.clear();
  for (const auto & [name, url] : cfg.parsers) {
    if (!names.insert(name).second) throw ConfigError("duplicate parser profile '" + name + "'");
  }
}

std::string snapshot(const RunConfig & cfg)
{
  std::string out;
  out += "region = " + quote(cfg.region) + "\n";
  out += "taxonomy = " + quote(cfg.taxonomy) + "\n";
  out += "rules = " + quote(cfg.rules) + "\n";
  out += "corpus = " + quote(cfg.corpus) + "\n";
  out += "parallel = " + std::to_string(cfg.parallel) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "system_name = " + quote(cfg.system_name) + "\n";
  out += "label = " + quote(cfg.label) + "\n";
  out += "frame_cap = " + std::to_string(cfg.frame_cap) + "\n";
  out += "sign_convention = " + quote(cfg.sign_convention) + "\n";
  out += "\n[thresholds]\n";
  out += "acceptance_score = " + real(cfg.thresholds.acceptance_score) + "\n";
  out += "v_min = " + real(cfg.thresholds.v_min) + "\n";
  out += "epsilon = " + real(cfg.thresholds.epsilon) + "\n";
  out += "band_k = " + real(cfg.thresholds.band_k) + "\n";
  out += "top_k = " + std::to_string(cfg.thresholds.top_k) + "\n";
  out += "\n[backends]\n";
  for (const auto & [role, kind] : backend_roles()) {
    auto it = cfg.backends.find(role);
    if (it != cfg.backends.end()) out += role + " = " + quote(it->second) + "\n";
  }
  out += "\n[parsers]\n";
  for (const auto & [name, url] : cfg.parsers) out += name + " = " + quote(url) + "\n";
  out += "\n[ads]\n";
  for (const auto & [name, url] : cfg.ads) out += name + " = " + quote(url) + "\n";
  return out;
}

std::string config_hash(const RunConfig & cfg)
{
  auto normalized = cfg;
  normalized.parallel = 1;
  return text::hex64(text::fnv1a64(snapshot(normalized)));
}

backends::BackendEndpoint endpoint(
  const RunConfig & cfg, const std::string & id, const std::string & url, backends::BackendKind kind)
{
  backends::BackendEndpoint ep;
  ep.kind = kind;
  ep.id = id;
  ep.url = url;
  // Mock script paths resolve against the config file directory.
  if (auto pos = url.find("script="); ep.is_mock() && pos != std::string::npos) {
    auto start = pos + 7;
    auto end = url.find('&', start);
    auto path = url.substr(start, end == std::string::npos ? std::string::npos : end - start);
    ep.url = url.substr(0, start) + cfg.resolve(path).string() +
             (end == std::string::npos ? "" : url.substr(end));
  }
  if (const char * token = std::getenv("AUTOMT_BACKEND_TOKEN"); token && *token) ep.bearer_token = token;
  return ep;
}

}  // namespace automt::config
