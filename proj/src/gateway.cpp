#include "umlbench/gateway.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>

#include "umlbench/puml.hpp"

namespace umlbench::gateway {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
}

class HttplibTransport : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::map<std::string, std::string>& headers, const std::string& body,
                    std::chrono::milliseconds timeout) override {
    static const std::regex split(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, split)) throw ConfigError("endpoint_url is not an http(s) URL: " + url);
    httplib::Client client(m[1].str());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    const std::string path = m[2].matched ? m[2].str() : "/";
    auto res = client.Post(path, h, body, "application/json");
    if (!res) throw TransportError("request to " + url + " failed: " + httplib::to_string(res.error()));
    return {res->status, res->body};
  }
};

json request_body(const ProviderConfig& config, const json& messages) {
  json body = {{"model", config.model_id}, {"messages", messages}};
  if (config.temperature) body["temperature"] = *config.temperature;
  if (config.max_tokens) body["max_tokens"] = *config.max_tokens;
  return body;
}

}  // namespace

PromptSequence assemble_session(std::string instruction, std::string baseline, std::string use_cases) {
  if (blank(instruction)) throw EmptyPart("instruction prompt is empty");
  if (blank(baseline)) throw EmptyPart("diagram prompt is empty");
  if (blank(use_cases)) throw EmptyPart("use-case prompt is empty");
  const auto outcome = puml::parse_with_issues(baseline);
  if (!outcome.diagram) throw BaselineHasMethods("baseline diagram does not parse");
  if (outcome.diagram->method_count() != 0) {
    throw BaselineHasMethods("baseline declares " + std::to_string(outcome.diagram->method_count()) + " method(s)");
  }
  return {{std::move(instruction), std::move(baseline), std::move(use_cases)}};
}

Mode mode_from_string(std::string_view s) {
  if (s == "live") return Mode::Live;
  if (s == "record") return Mode::Record;
  if (s == "replay") return Mode::Replay;
  throw ConfigError("mode must be live, record or replay: " + std::string(s));
}

ProviderConfig provider_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("provider config must be an object");
  ProviderConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "name") c.name = v.get<std::string>();
      else if (key == "endpoint_url") c.endpoint_url = v.get<std::string>();
      else if (key == "model_id") c.model_id = v.get<std::string>();
      else if (key == "auth_env_var") c.auth_env_var = v.get<std::string>();
      else if (key == "timeout_ms") c.timeout = std::chrono::milliseconds(v.get<long>());
      else if (key == "mode") c.mode = mode_from_string(v.get<std::string>());
      else if (key == "archive_dir") c.archive_dir = v.get<std::string>();
      else if (key == "max_transport_retries") c.max_transport_retries = v.get<unsigned>();
      else if (key == "temperature") c.temperature = v.get<double>();
      else if (key == "max_tokens") c.max_tokens = v.get<int>();
      else if (key == "auth_header") c.auth_header = v.get<std::string>();
      else if (key == "auth_prefix") c.auth_prefix = v.get<std::string>();
      else if (key == "headers") c.extra_headers = v.get<std::map<std::string, std::string>>();
      else throw ConfigError("unknown provider key: " + key);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad provider config value: ") + e.what());
  }
  if (c.name.empty()) throw ConfigError("provider config needs a name");
  return c;
}

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

std::string response_text(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("response is not JSON: ") + e.what());
  }
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& msg = j["choices"][0].value("message", json::object());
    if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
  }
  if (j.contains("content") && j["content"].is_array() && !j["content"].empty() &&
      j["content"][0].contains("text") && j["content"][0]["text"].is_string()) {
    return j["content"][0]["text"].get<std::string>();
  }
  throw TransportError("response has no assistant text");
}

fs::path session_dir(const ProviderConfig& config, int run_index) {
  return config.archive_dir / config.name / std::to_string(run_index);
}

std::string execute(const ProviderConfig& config, const PromptSequence& seq, int run_index, Transport* transport) {
  const auto dir = session_dir(config, run_index);
  if (config.mode == Mode::Replay) {
    const auto p = dir / "response.raw.txt";
    if (config.archive_dir.empty() || !fs::exists(p)) throw ReplayMiss("no archived session at " + dir.string());
    return response_text(read_file(p));
  }
  if (config.mode == Mode::Record && config.archive_dir.empty()) throw ConfigError("record mode needs archive_dir");
  const bool archive = !config.archive_dir.empty();

  const char* token = config.auth_env_var.empty() ? nullptr : std::getenv(config.auth_env_var.c_str());
  if (!config.auth_env_var.empty() && (!token || !*token)) {
    throw AuthError("environment variable " + config.auth_env_var + " is not set");
  }
  std::map<std::string, std::string> headers = config.extra_headers;
  if (token) headers[config.auth_header] = config.auth_prefix + token;

  std::unique_ptr<Transport> owned;
  if (!transport) {
    owned = make_http_transport();
    transport = owned.get();
  }

  json messages = json::array();
  std::string body;
  for (std::size_t i = 0; i < seq.parts.size(); ++i) {
    messages.push_back({{"role", "user"}, {"content", seq.parts[i]}});
    const std::string request = request_body(config, messages).dump();
    const std::string stem = "part" + std::to_string(i + 1);
    if (archive) write_file(dir / (stem + ".request.txt"), request);
    HttpResponse res;
    for (unsigned attempt = 0;; ++attempt) {
      try {
        res = transport->post(config.endpoint_url, headers, request, config.timeout);
        break;
      } catch (const TransportError&) {
        if (attempt >= config.max_transport_retries) throw;
      }
    }
    if (res.status == 401 || res.status == 403) {
      throw AuthError("endpoint rejected credentials from " + config.auth_env_var + " (HTTP " +
                      std::to_string(res.status) + ")");
    }
    if (archive) write_file(dir / (stem + ".response.raw.txt"), res.body);
    if (res.status < 200 || res.status >= 300) {
      throw TransportError("HTTP " + std::to_string(res.status) + " from " + config.endpoint_url);
    }
    body = res.body;
    messages.push_back({{"role", "assistant"}, {"content", response_text(body)}});
  }
  if (archive) write_file(dir / "response.raw.txt", body);
  return response_text(body);
}

Extraction extract_plantuml(std::string_view raw) {
  const auto start = raw.find("@startuml");
  if (start == std::string_view::npos) throw NoDiagramFound("response contains no @startuml");
  const auto end_tag = raw.find("@enduml", start);
  std::string_view span;
  Extraction out;
  if (end_tag == std::string_view::npos) {
    span = raw.substr(start);
  } else {
    span = raw.substr(start, end_tag + 7 - start);
    out.multiple = raw.find("@startuml", end_tag) != std::string_view::npos;
  }
  std::istringstream lines{std::string(span)};
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    const auto lead = line.find_first_not_of(" \t");
    if (lead != std::string::npos && line.compare(lead, 3, "```") == 0) continue;
    if (!first) out.diagram += '\n';
    out.diagram += line;
    first = false;
  }
  return out;
}

Extraction run_session(const ProviderConfig& config, const PromptSequence& seq, int run_index,
                       const fs::path& corpus_dir, Transport* transport) {
  const std::string text = execute(config, seq, run_index, transport);
  auto ex = extract_plantuml(text);
  if (!config.archive_dir.empty() && config.mode != Mode::Replay) {
    write_file(session_dir(config, run_index) / "extracted.puml", ex.diagram + "\n");
  }
  if (!corpus_dir.empty()) {
    const std::string stem = config.name + "_run" + std::to_string(run_index);
    write_file(corpus_dir / (stem + ".raw.txt"), text);
    write_file(corpus_dir / (stem + ".puml"), ex.diagram + "\n");
  }
  return ex;
}

}  // namespace umlbench::gateway
