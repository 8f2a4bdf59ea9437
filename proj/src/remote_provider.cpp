#include "bugslice/embedding.hpp"

#include "bugslice/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <thread>

namespace bugslice {

namespace {

using nlohmann::json;

class RemoteProvider final : public EmbeddingProvider {
public:
  RemoteProvider(std::string base_url, const RemoteOptions& options) : base_url_(std::move(base_url)), options_(options) {
    const json body = request([](httplib::Client& c) { return c.Get("/info"); }, "GET /info");
    try {
      info_.name = body.at("name").get<std::string>();
      info_.version = body.at("version").get<std::string>();
      info_.dim = body.at("dim").get<int>();
      info_.max_tokens = body.at("max_tokens").get<int>();
      info_.mask_token = body.at("mask_token").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::provider_unavailable, "malformed /info response: " + std::string(e.what()));
    }
    if (info_.dim <= 0 || info_.max_tokens <= 0) throw Error(ErrorCode::provider_unavailable, "/info reports a non-positive size");
  }

  const ProviderInfo& info() const override { return info_; }

  std::vector<EmbeddingVector> encode_tokens(std::span<const std::string> tokens,
                                             std::span<const int> mask_positions) const override {
    json req;
    req["tokens"] = std::vector<std::string>(tokens.begin(), tokens.end());
    req["mask_positions"] = std::vector<int>(mask_positions.begin(), mask_positions.end());
    const std::string payload = req.dump();
    const json body = request([&](httplib::Client& c) { return c.Post("/encode", payload, "application/json"); },
                              "POST /encode");
    std::vector<EmbeddingVector> out;
    try {
      const int dim = body.at("dim").get<int>();
      if (dim != info_.dim) {
        throw Error(ErrorCode::dim_mismatch, "service answered dim " + std::to_string(dim) + ", /info said " +
                                                 std::to_string(info_.dim));
      }
      for (const auto& row : body.at("vectors")) out.push_back(row.get<EmbeddingVector>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::provider_unavailable, "malformed /encode response: " + std::string(e.what()));
    }
    return out;
  }

private:
  template <class Call>
  json request(Call&& call, const char* what) const {
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
      httplib::Client client(base_url_);
      const auto t = std::chrono::milliseconds(options_.timeout_ms);
      client.set_connection_timeout(t);
      client.set_read_timeout(t);
      client.set_write_timeout(t);
      auto res = call(client);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorCode::provider_unavailable,
                    std::string(what) + " rejected with HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::provider_unavailable, std::string(what) + " returned invalid JSON: " + e.what());
      }
    }
    throw Error(ErrorCode::provider_unavailable, std::string(what) + " at " + base_url_ + " failed after " +
                                                     std::to_string(options_.retries + 1) + " attempts: " + last_error);
  }

  std::string base_url_;
  RemoteOptions options_;
  ProviderInfo info_;
};

} // namespace

std::unique_ptr<EmbeddingProvider> make_remote_provider(const std::string& base_url, const RemoteOptions& options) {
  return std::make_unique<RemoteProvider>(base_url, options);
}

} // namespace bugslice
