#include "proxyme/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "proxyme/json_io.hpp"
#include "proxyme/util.hpp"

namespace proxyme {

using nlohmann::json;

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void set_config_key(json& config, std::string_view dotted_key, std::string_view value) {
  if (dotted_key.empty()) throw ConfigError("override with an empty key");
  json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part(dotted_key.substr(start, dot - start));
    if (part.empty()) throw ConfigError("malformed key '" + std::string(dotted_key) + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(std::string(value)) : std::move(parsed);
}

void apply_overrides(json& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + a + "' is not key=value");
    set_config_key(config, std::string_view(a).substr(0, eq), std::string_view(a).substr(eq + 1));
  }
}

void apply_env_overrides(json& config, const char* const* environment) {
  static constexpr std::string_view kPrefix = "PROXYME_";
  std::vector<std::pair<std::string, std::string>> found;
  for (const char* const* e = environment; e && *e; ++e) {
    std::string_view var(*e);
    if (var.substr(0, kPrefix.size()) != kPrefix) continue;
    const auto eq = var.find('=');
    if (eq == std::string_view::npos) continue;
    std::string key(var.substr(kPrefix.size(), eq - kPrefix.size()));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (std::size_t p; (p = key.find("__")) != std::string::npos;) key.replace(p, 2, ".");
    found.emplace_back(std::move(key), std::string(var.substr(eq + 1)));
  }
  std::sort(found.begin(), found.end());
  for (const auto& [k, v] : found) set_config_key(config, k, v);
}

namespace {

template <class T>
T field(const json& obj, const std::string& path, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + path + key + "' has the wrong type");
  }
}

void require_positive(Millis v, const std::string& name) {
  if (v <= 0) throw ConfigError("field '" + name + "' must be positive");
}

EndpointConfig endpoint(const json& adapters, const char* name, StageKind stage) {
  const std::string path = std::string("adapters.") + name;
  auto it = adapters.find(name);
  if (it == adapters.end() || !it->is_object()) {
    throw ConfigError("field '" + path + "' is required for remote adapters");
  }
  EndpointConfig e;
  e.stage = stage;
  e.base_url = field<std::string>(*it, path + ".", "base_url", "");
  if (e.base_url.empty()) throw ConfigError("field '" + path + ".base_url' is required");
  e.path = field<std::string>(*it, path + ".", "path", "");
  e.timeout_ms = field<Millis>(*it, path + ".", "timeout_ms", e.timeout_ms);
  require_positive(e.timeout_ms, path + ".timeout_ms");
  e.max_in_flight =
      field<int>(*it, path + ".", "max_in_flight",
                 field<int>(adapters, "adapters.", "max_in_flight", e.max_in_flight));
  if (e.max_in_flight < 1 || e.max_in_flight > 1024) {
    throw ConfigError("field '" + path + ".max_in_flight' must be in 1..1024");
  }
  return e;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

ServiceConfig parse_service_config(const json& config, const std::filesystem::path& base_dir) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  ServiceConfig c;
  c.host = field<std::string>(config, "", "host", c.host);
  c.port = field<int>(config, "", "port", c.port);
  if (c.port < 0 || c.port > 65535) throw ConfigError("field 'port' must be in 0..65535");
  c.data_dir = resolve(base_dir, field<std::string>(config, "", "data_dir", c.data_dir.string()));
  c.streaming = field<bool>(config, "", "streaming", c.streaming);
  c.chunk_ms = field<Millis>(config, "", "chunk_ms", c.chunk_ms);
  require_positive(c.chunk_ms, "chunk_ms");
  c.buffer_depth = field<int>(config, "", "buffer_depth", c.buffer_depth);
  if (c.buffer_depth < 1) throw ConfigError("field 'buffer_depth' must be at least 1");
  c.masking_window_ms = field<Millis>(config, "", "masking_window_ms", c.masking_window_ms);
  if (c.masking_window_ms < 0) throw ConfigError("field 'masking_window_ms' must be >= 0");
  c.words_per_minute = field<int>(config, "", "words_per_minute", c.words_per_minute);
  require_positive(c.words_per_minute, "words_per_minute");
  c.seed = field<std::uint64_t>(config, "", "seed", c.seed);
  if (auto it = config.find("voice_sample_ref"); it != config.end() && !it->is_null()) {
    c.voice_sample_ref = field<std::string>(config, "", "voice_sample_ref", "");
  }

  if (auto it = config.find("latency_profile"); it != config.end()) {
    LatencyProfile p;
    try {
      p = it->get<LatencyProfile>();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("field 'latency_profile': ") + e.what());
    }
    p.validate();
    c.latency_profile = p;
  }

  auto ad = config.find("adapters");
  if (ad == config.end() || !ad->is_object()) {
    throw ConfigError("section 'adapters' is missing");
  }
  const std::string kind = field<std::string>(*ad, "adapters.", "kind", "");
  if (kind == "mock") {
    c.adapters.kind = AdapterConfig::Kind::Mock;
  } else if (kind == "remote") {
    c.adapters.kind = AdapterConfig::Kind::Remote;
    c.adapters.stt = endpoint(*ad, "stt", StageKind::Stt);
    c.adapters.modifier = endpoint(*ad, "modifier", StageKind::Llm);
    c.adapters.tts = endpoint(*ad, "tts", StageKind::Tts);
  } else {
    throw ConfigError("field 'adapters.kind' must be \"mock\" or \"remote\"");
  }

  if (auto it = config.find("scenarios"); it != config.end()) {
    c.scenarios = resolve(base_dir, field<std::string>(config, "", "scenarios", ""));
  }
  if (auto it = config.find("questionnaire"); it != config.end()) {
    c.questionnaire = resolve(base_dir, field<std::string>(config, "", "questionnaire", ""));
  }
  return c;
}

GatewayConfig gateway_config(const ServiceConfig& config) {
  GatewayConfig g;
  g.streaming = config.streaming;
  g.chunk_ms = config.chunk_ms;
  g.buffer_depth = config.buffer_depth;
  g.masking_window_ms = config.masking_window_ms;
  g.words_per_minute = config.words_per_minute;
  g.data_dir = config.data_dir;
  g.voice_sample_ref = config.voice_sample_ref;
  return g;
}

AdapterFactory make_adapter_factory(const ServiceConfig& config) {
  if (config.adapters.kind == AdapterConfig::Kind::Mock) {
    return [profile = config.latency_profile, seed = config.seed,
            wpm = config.words_per_minute](int participant) {
      return make_mock_adapters(profile, mix_seed(seed, static_cast<std::uint64_t>(participant)),
                                wpm);
    };
  }
  AdapterSet shared{std::make_shared<RemoteStt>(*config.adapters.stt),
                    std::make_shared<RemoteModifier>(*config.adapters.modifier),
                    std::make_shared<RemoteTts>(*config.adapters.tts)};
  return [shared](int) { return shared; };
}

namespace {

std::string describe(const Distribution& d) {
  std::ostringstream s;
  if (d.kind == Distribution::Kind::Fixed) {
    s << d.mean;
  } else {
    s << "N(" << d.mean << ", " << d.stddev << ")";
  }
  return s.str();
}

}  // namespace

std::string describe(const ServiceConfig& c) {
  std::ostringstream s;
  s << "adapters: "
    << (c.adapters.kind == AdapterConfig::Kind::Mock ? "mock" : "remote");
  if (c.adapters.kind == AdapterConfig::Kind::Remote) {
    s << " (stt " << c.adapters.stt->base_url << ", modifier " << c.adapters.modifier->base_url
      << ", tts " << c.adapters.tts->base_url << ")";
  }
  s << "\nprofile: stt " << describe(c.latency_profile.stt_ms) << " ms, llm "
    << describe(c.latency_profile.llm_ms) << " ms, tts " << describe(c.latency_profile.tts_total_ms)
    << " ms, first chunk " << describe(c.latency_profile.tts_first_chunk_ms) << " ms"
    << "\nmode: " << (c.streaming ? "streaming" : "batch") << ", chunk " << c.chunk_ms
    << " ms, buffer depth " << c.buffer_depth << ", masking window " << c.masking_window_ms
    << " ms\ndata dir: " << c.data_dir.string();
  return s.str();
}

}  // namespace proxyme
