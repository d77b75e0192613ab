#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "proxyme/gateway.hpp"
#include "proxyme/latency.hpp"
#include "proxyme/remote_adapters.hpp"

namespace proxyme {

struct AdapterConfig {
  enum class Kind { Mock, Remote };

  Kind kind = Kind::Mock;
  std::optional<EndpointConfig> stt;
  std::optional<EndpointConfig> modifier;
  std::optional<EndpointConfig> tts;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8787;
  std::filesystem::path data_dir = "proxyme-data";
  bool streaming = false;
  Millis chunk_ms = 1000;
  int buffer_depth = 1;
  Millis masking_window_ms = 3000;
  int words_per_minute = kDefaultWordsPerMinute;
  LatencyProfile latency_profile;
  AdapterConfig adapters;
  std::optional<std::filesystem::path> scenarios;
  std::optional<std::filesystem::path> questionnaire;
  std::optional<std::string> voice_sample_ref;
  std::uint64_t seed = 0;
};

/// Reads a JSON config file. ParseError on bad syntax.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// Sets a dotted key ("adapters.tts.timeout_ms") to a value given as text.
/// Text that parses as JSON is stored as JSON, anything else as a string.
void set_config_key(nlohmann::json& config, std::string_view dotted_key, std::string_view value);

/// Applies "key=value" overrides.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& assignments);

/// Applies PROXYME_<KEY> variables from the environment; "__" separates
/// nesting levels and keys are lower-cased (PROXYME_ADAPTERS__KIND=remote).
void apply_env_overrides(nlohmann::json& config, const char* const* environment);

/// Validates and converts. ConfigError names the offending field. Relative
/// paths resolve against base_dir.
ServiceConfig parse_service_config(const nlohmann::json& config,
                                   const std::filesystem::path& base_dir = {});

GatewayConfig gateway_config(const ServiceConfig& config);

/// Mock adapters get a per-participant seed; remote endpoints are shared so
/// their in-flight bounds hold across sessions.
AdapterFactory make_adapter_factory(const ServiceConfig& config);

/// One-paragraph description for the startup banner.
std::string describe(const ServiceConfig& config);

}  // namespace proxyme
