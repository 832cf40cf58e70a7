#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

#include "dory/errors.hpp"
#include "dory/textmetrics.hpp"

namespace dory::metrics {

namespace {

using json = nlohmann::json;

// POST /v1/embeddings with {model, input}; reads data[0].embedding
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string base_url, std::string api_key, std::string model)
      : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {
    if (base_url_.empty()) {
      const char* env = std::getenv("DORY_BASE_URL");
      base_url_ = env ? env : "";
    }
    if (api_key_.empty()) {
      const char* env = std::getenv("DORY_API_KEY");
      api_key_ = env ? env : "";
    }
    if (base_url_.empty()) {
      throw EmbedderUnavailable("remote embedder needs a base URL (flag or DORY_BASE_URL)");
    }
  }

  std::vector<double> embed(const std::string& text) const override {
    httplib::Client client(base_url_);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const json body = {{"model", model_}, {"input", text}};
    auto res = client.Post("/v1/embeddings", headers, body.dump(), "application/json");
    if (!res) {
      throw EmbedderUnavailable("embeddings transport failure: " +
                                httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw EmbedderUnavailable("embeddings HTTP " + std::to_string(res->status));
    }
    const json j = json::parse(res->body);
    return j.at("data").at(0).at("embedding").get<std::vector<double>>();
  }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
};

}  // namespace

std::unique_ptr<Embedder> make_remote_embedder(std::string base_url, std::string api_key,
                                               std::string model) {
  return std::make_unique<RemoteEmbedder>(std::move(base_url), std::move(api_key),
                                          std::move(model));
}

}  // namespace dory::metrics
