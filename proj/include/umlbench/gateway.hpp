#pragma once

// Three-prompt enrichment session against a chat-completion HTTP endpoint,
// with verbatim archival and offline replay.
//
// Archive layout under `archive_dir`:
//   <model>/<run>/part{1,2,3}.request.txt       request bodies as sent
//   <model>/<run>/part{1,2,3}.response.raw.txt  response bodies as received
//   <model>/<run>/response.raw.txt              final response body
//   <model>/<run>/extracted.puml                diagram extracted from it

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "umlbench/error.hpp"

namespace umlbench::gateway {

class BaselineHasMethods : public Error {
 public:
  using Error::Error;
};
class EmptyPart : public Error {
 public:
  using Error::Error;
};
class TransportError : public Error {
 public:
  using Error::Error;
};
class AuthError : public Error {
 public:
  using Error::Error;
};
class ReplayMiss : public Error {
 public:
  using Error::Error;
};
class NoDiagramFound : public Error {
 public:
  using Error::Error;
};

struct PromptSequence {
  /// Instruction, methodless diagram, use cases; sent in this order.
  std::array<std::string, 3> parts;

  const std::string& instruction() const { return parts[0]; }
  const std::string& diagram() const { return parts[1]; }
  const std::string& use_cases() const { return parts[2]; }
};

/// Throws EmptyPart for blank input and BaselineHasMethods when the diagram
/// declares a method (or does not parse). Inputs are copied unchanged.
PromptSequence assemble_session(std::string instruction, std::string baseline, std::string use_cases);

enum class Mode { Live, Record, Replay };

Mode mode_from_string(std::string_view s);

struct ProviderConfig {
  std::string name;
  std::string endpoint_url;
  std::string model_id;
  std::string auth_env_var;
  std::chrono::milliseconds timeout{120000};
  Mode mode = Mode::Replay;
  std::filesystem::path archive_dir;
  /// Retries after network failures only; HTTP error statuses are final.
  unsigned max_transport_retries = 2;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::string auth_header = "Authorization";
  std::string auth_prefix = "Bearer ";
  std::map<std::string, std::string> extra_headers;
};

/// Reads a provider entry from a JSON object. Recognized keys: name,
/// endpoint_url, model_id, auth_env_var, timeout_ms, mode, archive_dir,
/// max_transport_retries, temperature, max_tokens, auth_header, auth_prefix,
/// headers. Throws ConfigError on unknown keys or bad types.
ProviderConfig provider_from_json(const nlohmann::json& j);

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POST transport. Implementations throw TransportError for network-level
/// failures (no HTTP status received).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers,
                            const std::string& body, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport; https needs the library built with OpenSSL.
std::unique_ptr<Transport> make_http_transport();

/// Assistant text of a chat-completion response body: choices[0].message.content,
/// falling back to content[0].text.
std::string response_text(const std::string& body);

/// Runs one session for (model, run) and returns the final assistant text.
/// Replay reads the archive and never touches the network or the token.
std::string execute(const ProviderConfig& config, const PromptSequence& seq, int run_index, Transport* transport = nullptr);

struct Extraction {
  std::string diagram;
  /// More than one @startuml block was present; the first was returned.
  bool multiple = false;
};

/// First `@startuml ... @enduml` span, code fences and prose removed.
Extraction extract_plantuml(std::string_view raw);

/// execute + extract; writes extracted.puml into the archive (when one is
/// configured) and `<model>_run<N>.raw.txt` / `.puml` into `corpus_dir` when
/// non-empty.
Extraction run_session(const ProviderConfig& config, const PromptSequence& seq, int run_index,
                       const std::filesystem::path& corpus_dir = {}, Transport* transport = nullptr);

std::filesystem::path session_dir(const ProviderConfig& config, int run_index);

}  // namespace umlbench::gateway
