#include "phishguard/serve.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace phishguard::serve {

using nlohmann::json;

struct ScoringServer::Impl {
    models::TrainedModel model;
    features::ExtractConfig config;
    httplib::Server server;
};

ScoringServer::ScoringServer(models::TrainedModel model, features::ExtractConfig config)
    : impl_(std::make_unique<Impl>()) {
    impl_->model = std::move(model);
    impl_->config = std::move(config);
}

ScoringServer::~ScoringServer() = default;

std::string ScoringServer::health_json() const {
    json body;
    body["status"] = "ok";
    body["model_kind"] = models::kind_name(impl_->model.spec.kind);
    return body.dump();
}

std::pair<int, std::string> ScoringServer::score_json(const std::string& body) const {
    json request;
    try {
        request = json::parse(body);
    } catch (const json::parse_error& e) {
        return {400, json{{"error", std::string("malformed JSON: ") + e.what()}}.dump()};
    }
    if (!request.is_object() || !request.contains("url") || !request["url"].is_string()) {
        return {400, json{{"error", "body must be an object with a string \"url\" field"}}.dump()};
    }
    try {
        const std::string url = request["url"].get<std::string>();
        std::optional<std::string> html;
        if (request.contains("html")) {
            if (!request["html"].is_string()) {
                return {400, json{{"error", "\"html\" must be a string"}}.dump()};
            }
            html = request["html"].get<std::string>();
        } else if (request.value("fetch", false)) {
            // Remote fetches only on explicit opt-in.
            features::PageDocument doc = features::fetch_page(url);
            html = doc.html;
        }
        features::FeatureVector fv;
        try {
            fv = features::extract(url, html, impl_->config);
        } catch (const ParseError& e) {
            return {422, json{{"error", std::string("extraction failed: ") + e.what()}}.dump()};
        }
        std::vector<double> row(fv.values.begin(), fv.values.end());
        const double probability = models::predict_proba(impl_->model, row);
        json response;
        response["probability"] = probability;
        response["label"] = probability >= 0.5 ? 1 : 0;
        response["model_kind"] = models::kind_name(impl_->model.spec.kind);
        char fp[24];
        std::snprintf(fp, sizeof(fp), "%016llx",
                      static_cast<unsigned long long>(impl_->model.schema_fp));
        response["schema_fingerprint"] = fp;
        if (request.value("verbose", false)) {
            json values = json::object();
            const auto& names = features::schema();
            for (std::size_t i = 0; i < names.size(); ++i) values[names[i]] = fv.values[i];
            response["features"] = values;
        }
        return {200, response.dump()};
    } catch (const FetchError& e) {
        return {422, json{{"error", std::string("fetch failed: ") + e.what()},
                          {"category", e.category}}
                         .dump()};
    } catch (const std::exception& e) {
        return {500, json{{"error", e.what()}}.dump()};
    }
}

void ScoringServer::run(const ServerOptions& options) {
    auto& server = impl_->server;
    server.set_payload_max_length(options.max_body_bytes);

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(health_json(), "application/json");
    });
    server.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string content_type = req.get_header_value("Content-Type");
        if (content_type.find("application/json") == std::string::npos) {
            res.status = 400;
            res.set_content("{\"error\":\"Content-Type must be application/json\"}",
                            "application/json");
            return;
        }
        auto [status, body] = score_json(req.body);
        res.status = status;
        res.set_content(body, "application/json");
    });

    if (!server.listen(options.host, options.port)) {
        throw FetchError("connect", "failed to bind " + options.host + ":" +
                                        std::to_string(options.port));
    }
}

void ScoringServer::stop() { impl_->server.stop(); }

bool ScoringServer::wait_until_ready(int timeout_ms) const {
    (void)timeout_ms;
    impl_->server.wait_until_ready();
    return impl_->server.is_running();
}

}  // namespace phishguard::serve
