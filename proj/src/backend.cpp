#include "dory/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"

#include "dory/errors.hpp"
#include "dory/hash.hpp"

namespace dory::backend {

std::string to_string(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::System;
  if (s == "assistant") return Role::Assistant;
  if (s == "user") return Role::User;
  throw Error("unknown message role: " + s);
}

json request_to_json(const ChatRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return json{
      {"model", req.model_id},
      {"messages", std::move(messages)},
      {"temperature", req.temperature},
      {"max_tokens", req.max_tokens},
      {"want_logprobs", req.want_logprobs},
      {"sample_index", req.sample_index},
  };
}

ChatRequest request_from_json(const json& j) {
  ChatRequest req;
  req.model_id = j.at("model").get<std::string>();
  for (const auto& m : j.at("messages")) {
    req.messages.push_back(
        {role_from_string(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
  }
  req.temperature = j.at("temperature").get<double>();
  req.max_tokens = j.at("max_tokens").get<int>();
  req.want_logprobs = j.at("want_logprobs").get<bool>();
  req.sample_index = j.at("sample_index").get<int>();
  return req;
}

std::string fingerprint(const ChatRequest& req) {
  return fnv128_hex(request_to_json(req).dump());
}

json record_to_json(const CompletionRecord& rec) {
  json tokens = json::array();
  for (const auto& t : rec.tokens.tokens) {
    tokens.push_back({{"t", t.surface}, {"lp", t.logprob}});
  }
  return json{{"text", rec.text}, {"tokens", std::move(tokens)}, {"model", rec.model_id}};
}

CompletionRecord record_from_json(const json& j, std::string fingerprint_hint) {
  CompletionRecord rec;
  rec.text = j.at("text").get<std::string>();
  rec.model_id = j.value("model", "");
  rec.request_fingerprint = std::move(fingerprint_hint);
  for (const auto& t : j.value("tokens", json::array())) {
    rec.tokens.tokens.push_back({t.at("t").get<std::string>(), t.at("lp").get<double>()});
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Cassette
// ---------------------------------------------------------------------------

Cassette Cassette::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open cassette: " + file.string());
  Cassette cassette;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("meta")) {
        cassette.created = j["meta"].value("created", "");
        cassette.endpoint = j["meta"].value("endpoint", "");
        continue;
      }
      const auto fp = j.at("fingerprint").get<std::string>();
      Entry entry;
      entry.request = request_from_json(j.at("request"));
      entry.response = record_from_json(j.at("response"), fp);
      cassette.entries_[fp] = std::move(entry);
    } catch (const json::exception& e) {
      throw ParseError("cassette " + file.string() + " line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return cassette;
}

void Cassette::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write cassette: " + file.string());
  if (!created.empty() || !endpoint.empty()) {
    out << json{{"meta", {{"created", created}, {"endpoint", endpoint}}}}.dump() << "\n";
  }
  for (const auto& [fp, entry] : entries_) {
    out << json{{"fingerprint", fp},
                {"request", request_to_json(entry.request)},
                {"response", record_to_json(entry.response)}}
               .dump()
        << "\n";
  }
}

const CompletionRecord* Cassette::find(const std::string& fp) const {
  auto it = entries_.find(fp);
  return it == entries_.end() ? nullptr : &it->second.response;
}

void Cassette::put(const ChatRequest& req, const CompletionRecord& rec) {
  entries_[rec.request_fingerprint] = Entry{req, rec};
}

// ---------------------------------------------------------------------------
// Live transport
// ---------------------------------------------------------------------------

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

class LiveTransport final : public Transport {
 public:
  explicit LiveTransport(LiveOptions options) : options_(std::move(options)) {
    if (options_.base_url.empty()) options_.base_url = env_or("DORY_BASE_URL", "");
    if (options_.api_key.empty()) options_.api_key = env_or("DORY_API_KEY", "");
    if (options_.base_url.empty()) {
      throw EndpointError("no base URL configured (flag or DORY_BASE_URL)");
    }
  }

  CompletionRecord perform(const ChatRequest& req) override {
    json body = {
        {"model", req.model_id},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };
    body["messages"] = json::array();
    for (const auto& m : req.messages) {
      body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    if (req.want_logprobs) {
      body["logprobs"] = true;
      body["top_logprobs"] = 1;
    }

    std::string last_error;
    for (int attempt = 0; attempt < options_.attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(500 << (attempt - 1)));
      }
      try {
        return perform_once(body, req);
      } catch (const MissingLogprobs&) {
        throw;  // retrying will not change the endpoint's capabilities
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    throw EndpointError("chat completion failed after " + std::to_string(options_.attempts) +
                        " attempts: " + last_error);
  }

  std::string name() const override { return options_.base_url; }

 private:
  CompletionRecord perform_once(const json& body, const ChatRequest& req) {
    httplib::Client client(options_.base_url);
    client.set_connection_timeout(options_.timeout_seconds);
    client.set_read_timeout(options_.timeout_seconds);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      throw EndpointError("transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw EndpointError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    json j = json::parse(res->body);
    const auto& choice = j.at("choices").at(0);

    CompletionRecord rec;
    rec.text = choice.at("message").at("content").get<std::string>();
    rec.model_id = j.value("model", req.model_id);
    if (req.want_logprobs) {
      if (!choice.contains("logprobs") || choice["logprobs"].is_null() ||
          !choice["logprobs"].contains("content")) {
        throw MissingLogprobs("endpoint returned no logprobs despite logprobs=true");
      }
      for (const auto& t : choice["logprobs"]["content"]) {
        rec.tokens.tokens.push_back(
            {t.at("token").get<std::string>(), t.at("logprob").get<double>()});
      }
    }
    return rec;
  }

  LiveOptions options_;
};

std::string now_utc_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_request(const ChatRequest& req) {
  if (req.messages.empty()) throw Error("request has no messages");
  if (req.messages.back().role != Role::User) {
    throw Error("final message role must be user");
  }
  if (req.temperature < 0.0) throw Error("temperature must be >= 0");
}

void validate_record(const ChatRequest& req, const CompletionRecord& rec) {
  if (req.want_logprobs && rec.tokens.empty()) {
    throw MissingLogprobs("no token logprobs for request " + rec.request_fingerprint);
  }
  if (!rec.tokens.empty()) {
    for (const auto& t : rec.tokens.tokens) {
      if (!(t.logprob <= 0.0)) {
        throw PositiveLogprob("record carries a positive logprob");
      }
    }
    if (rec.tokens.text() != rec.text) {
      throw Error("token surfaces do not reproduce the record text (fingerprint " +
                  rec.request_fingerprint + ")");
    }
  }
}

}  // namespace

std::shared_ptr<Transport> make_live_transport(LiveOptions options) {
  return std::make_shared<LiveTransport>(std::move(options));
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway Gateway::replay(const std::filesystem::path& cassette_file) {
  Gateway g;
  g.state_->mode = Mode::Replay;
  g.state_->cassette = Cassette::load(cassette_file);
  g.state_->cassette_file = cassette_file;
  return g;
}

Gateway Gateway::record(std::shared_ptr<Transport> transport,
                        const std::filesystem::path& cassette_file) {
  Gateway g;
  g.state_->mode = Mode::Record;
  g.state_->transport = std::move(transport);
  g.state_->cassette_file = cassette_file;
  if (std::filesystem::exists(cassette_file)) {
    g.state_->cassette = Cassette::load(cassette_file);
  } else {
    g.state_->cassette.created = now_utc_iso8601();
    g.state_->cassette.endpoint = g.state_->transport->name();
  }
  return g;
}

Gateway Gateway::live(std::shared_ptr<Transport> transport) {
  Gateway g;
  g.state_->mode = Mode::Live;
  g.state_->transport = std::move(transport);
  return g;
}

CompletionRecord Gateway::complete(const ChatRequest& req) const {
  validate_request(req);
  const std::string fp = fingerprint(req);

  if (state_->mode == Mode::Replay) {
    const CompletionRecord* rec = state_->cassette.find(fp);
    if (!rec) {
      throw CassetteMiss("fingerprint " + fp + " not in cassette " +
                         state_->cassette_file.string() + " (fixture incomplete)");
    }
    validate_record(req, *rec);
    return *rec;
  }

  if (state_->mode == Mode::Record) {
    {
      std::lock_guard lock(state_->write_mutex);
      if (const CompletionRecord* rec = state_->cassette.find(fp)) {
        validate_record(req, *rec);
        return *rec;
      }
    }
    CompletionRecord rec = state_->transport->perform(req);
    rec.request_fingerprint = fp;
    validate_record(req, rec);
    std::lock_guard lock(state_->write_mutex);
    if (const CompletionRecord* existing = state_->cassette.find(fp)) {
      return *existing;  // a sibling worker recorded it first
    }
    state_->cassette.put(req, rec);
    state_->cassette.save(state_->cassette_file);
    return rec;
  }

  CompletionRecord rec = state_->transport->perform(req);
  rec.request_fingerprint = fp;
  validate_record(req, rec);
  return rec;
}

std::vector<CompletionOutcome> Gateway::complete_batch(const std::vector<ChatRequest>& requests,
                                                       int parallelism) const {
  if (parallelism < 1) throw Error("parallelism must be >= 1");
  std::vector<CompletionOutcome> results(requests.size());
  if (requests.empty()) return results;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        results[i].record = complete(requests[i]);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(parallelism), requests.size());
  if (n_threads <= 1) {
    worker();
    return results;
  }
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return results;
}

}  // namespace dory::backend
