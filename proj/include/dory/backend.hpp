#pragma once

/**
 * Uniform gateway to OpenAI-compatible chat-completions endpoints with
 * per-token logprobs, plus a deterministic record/replay cassette for
 * hermetic, bit-exact offline runs.
 *
 * Three modes, no hybrids:
 *   replay  answers from a cassette only; a missing fingerprint raises
 *           CassetteMiss and never falls through to the network
 *   record  performs the transport call and appends the result to the
 *           cassette (already-recorded fingerprints are answered from the
 *           cassette so repeated deterministic requests stay single-entry)
 *   live    transport only, nothing persisted
 *
 * Gateway handles are shareable across concurrent workers: cassette writes
 * are serialized internally and replay reads are immutable.
 *
 * Logprobs are natural-log (nats), matching the wire convention; everything
 * downstream computes entropy in nats.
 */

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dory/tokens.hpp"

namespace dory::backend {

using json = nlohmann::json;

enum class Role { System, User, Assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct Message {
  Role role = Role::User;
  std::string content;

  bool operator==(const Message&) const = default;
};

/// One chat-completion request. `sample_index` disambiguates repeated
/// sampling at temperature > 0: it is part of the fingerprint, so "three
/// samplings" are three distinct cassette entries even with identical bodies.
struct ChatRequest {
  std::string model_id;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 512;
  bool want_logprobs = false;
  int sample_index = 0;

  bool operator==(const ChatRequest&) const = default;
};

/// Canonical JSON form of a request (sorted keys); fingerprints hash this.
json request_to_json(const ChatRequest& req);
ChatRequest request_from_json(const json& j);

/// Content hash covering every request field, rendered as 32 hex chars.
std::string fingerprint(const ChatRequest& req);

/// One model call's result.
struct CompletionRecord {
  std::string text;
  TokenSequence tokens;
  std::string model_id;
  std::string request_fingerprint;

  bool operator==(const CompletionRecord&) const = default;
};

json record_to_json(const CompletionRecord& rec);
CompletionRecord record_from_json(const json& j, std::string fingerprint_hint = {});

/// Request -> response log, loadable from / appendable to a JSONL file.
/// Line format, one entry per line:
///   {"fingerprint": hex, "request": {...}, "response":
///    {"text": ..., "tokens": [{"t": surface, "lp": logprob}, ...], "model": ...}}
/// An optional leading {"meta": {"created": ..., "endpoint": ...}} line carries
/// provenance.
class Cassette {
 public:
  struct Entry {
    ChatRequest request;
    CompletionRecord response;
  };

  static Cassette load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  bool contains(const std::string& fp) const { return entries_.count(fp) != 0; }
  const CompletionRecord* find(const std::string& fp) const;
  void put(const ChatRequest& req, const CompletionRecord& rec);

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::string created;
  std::string endpoint;

 private:
  std::map<std::string, Entry> entries_;
};

/// Wire-level executor of a single request.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual CompletionRecord perform(const ChatRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Transport backed by a plain function; used for synthetic backends.
class CallbackTransport final : public Transport {
 public:
  using Fn = std::function<CompletionRecord(const ChatRequest&)>;
  explicit CallbackTransport(Fn fn, std::string name = "callback")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  CompletionRecord perform(const ChatRequest& req) override { return fn_(req); }
  std::string name() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

struct LiveOptions {
  std::string base_url;  // falls back to DORY_BASE_URL
  std::string api_key;   // falls back to DORY_API_KEY
  int timeout_seconds = 120;
  int attempts = 3;      // fixed exponential schedule: 0.5s, 1s between tries
};

/// HTTP transport for POST /v1/chat/completions with logprobs=true,
/// top_logprobs=1. Throws EndpointError on transport/HTTP failure.
std::shared_ptr<Transport> make_live_transport(LiveOptions options = {});

/// Positional result of a batched call; `error` is empty on success.
struct CompletionOutcome {
  std::optional<CompletionRecord> record;
  std::string error;

  bool ok() const { return record.has_value(); }
};

class Gateway {
 public:
  enum class Mode { Replay, Record, Live };

  static Gateway replay(const std::filesystem::path& cassette_file);
  static Gateway record(std::shared_ptr<Transport> transport,
                        const std::filesystem::path& cassette_file);
  static Gateway live(std::shared_ptr<Transport> transport);

  /// Execute one request per the gateway mode. Validates that messages are
  /// non-empty and end with a user turn, that logprobs arrived when requested,
  /// and that token surfaces concatenate exactly to the returned text.
  CompletionRecord complete(const ChatRequest& req) const;

  /// Results in request order regardless of completion order; each element
  /// identical to a standalone complete() call. One failure never aborts
  /// siblings.
  std::vector<CompletionOutcome> complete_batch(const std::vector<ChatRequest>& requests,
                                                int parallelism) const;

  Mode mode() const { return state_->mode; }
  const Cassette& cassette() const { return state_->cassette; }

 private:
  struct State {
    Mode mode = Mode::Replay;
    Cassette cassette;
    std::shared_ptr<Transport> transport;
    std::filesystem::path cassette_file;
    mutable std::mutex write_mutex;
  };

  Gateway() : state_(std::make_shared<State>()) {}
  std::shared_ptr<State> state_;
};

}  // namespace dory::backend
