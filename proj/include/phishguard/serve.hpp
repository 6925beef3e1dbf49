#pragma once

#include <memory>
#include <string>
#include <utility>

#include "phishguard/features.hpp"
#include "phishguard/models.hpp"

namespace phishguard::serve {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t max_body_bytes = 2 * 1024 * 1024;
};

// Wraps a loaded model behind POST /score and GET /health. The model and
// scaler are immutable shared state; handlers are stateless, so identical
// request bodies always yield identical responses.
class ScoringServer {
  public:
    explicit ScoringServer(models::TrainedModel model, features::ExtractConfig config = {});
    ~ScoringServer();

    // Pure request handler: (status code, JSON body). Exposed so tests and
    // parity checks can bypass the socket layer.
    std::pair<int, std::string> score_json(const std::string& body) const;
    std::string health_json() const;

    // Blocks until stop(). Throws FetchError on bind failure.
    void run(const ServerOptions& options);
    void stop();
    bool wait_until_ready(int timeout_ms) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace phishguard::serve
