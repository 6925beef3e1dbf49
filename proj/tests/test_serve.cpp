#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>

#include <nlohmann/json.hpp>

#include <thread>

#include "phishguard/features.hpp"
#include "phishguard/models.hpp"
#include "phishguard/serve.hpp"

using namespace phishguard;
using nlohmann::json;

namespace {

models::TrainedModel trained_toy_model() {
    dataset::RawTable t;
    t.feature_names = features::schema();
    t.features = Matrix(40, features::kFeatureCount);
    SeededRng rng(61);
    for (std::size_t r = 0; r < 40; ++r) {
        const int label = static_cast<int>(r % 2);
        t.labels.push_back(label);
        for (std::size_t c = 0; c < features::kFeatureCount; ++c) {
            t.features(r, c) = rng.normal() + (c < 8 ? (label ? 2.0 : -2.0) : 0.0);
        }
    }
    return models::fit(models::default_spec(models::Kind::LogisticRegression), t.features,
                       t.labels);
}

}  // namespace

TEST_CASE("score_json scores a bare URL") {
    serve::ScoringServer server(trained_toy_model());
    const auto [status, body] = server.score_json(R"({"url": "http://192.0.2.7/login"})");
    CHECK(status == 200);
    const auto response = json::parse(body);
    CHECK(response.at("probability").get<double>() >= 0.0);
    CHECK(response.at("probability").get<double>() <= 1.0);
    const int label = response.at("label").get<int>();
    CHECK(label == (response.at("probability").get<double>() >= 0.5 ? 1 : 0));
    CHECK(response.at("model_kind") == "logistic_regression");
    CHECK(response.at("schema_fingerprint").get<std::string>().size() == 16);
    CHECK_FALSE(response.contains("features"));
}

TEST_CASE("score_json accepts inline html and a verbose flag") {
    serve::ScoringServer server(trained_toy_model());
    const json request = {{"url", "http://example.com/"},
                          {"html", "<html><body><a href='#'>x</a></body></html>"},
                          {"verbose", true}};
    const auto [status, body] = server.score_json(request.dump());
    CHECK(status == 200);
    const auto response = json::parse(body);
    REQUIRE(response.contains("features"));
    CHECK(response["features"].size() == features::kFeatureCount);
    CHECK(response["features"].at("MissingTitle") == 1.0);
}

TEST_CASE("score_json rejects malformed bodies with 400") {
    serve::ScoringServer server(trained_toy_model());
    CHECK(server.score_json("{not json").first == 400);
    CHECK(server.score_json("{}").first == 400);
    CHECK(server.score_json(R"({"url": 7})").first == 400);
    CHECK(server.score_json(R"([1,2,3])").first == 400);
    CHECK(server.score_json(R"({"url": "http://x.com/", "html": 5})").first == 400);
}

TEST_CASE("score_json returns 422 when extraction or fetch fails") {
    serve::ScoringServer server(trained_toy_model());
    CHECK(server.score_json(R"({"url": "http://"})").first == 422);
    // Unreachable fetch target, explicit opt-in.
    const auto [status, body] =
        server.score_json(R"({"url": "http://127.0.0.1:1/", "fetch": true})");
    CHECK(status == 422);
    CHECK(json::parse(body).at("category") == "connect");
}

TEST_CASE("health_json reports ok and the model kind") {
    serve::ScoringServer server(trained_toy_model());
    const auto health = json::parse(server.health_json());
    CHECK(health.at("status") == "ok");
    CHECK(health.at("model_kind") == "logistic_regression");
}

TEST_CASE("identical bodies give identical responses, and score matches predict") {
    const auto model = trained_toy_model();
    serve::ScoringServer server(trained_toy_model());
    SeededRng rng(3);
    for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::string url =
            "http://host" + std::to_string(rng.next_below(1000)) + ".example.com/p";
        const std::string body = json{{"url", url}}.dump();
        const auto a = server.score_json(body);
        const auto b = server.score_json(body);
        CHECK(a == b);

        const auto fv = features::extract(url, std::nullopt);
        std::vector<double> row(fv.values.begin(), fv.values.end());
        const double expected = models::predict_proba(model, row);
        CHECK(json::parse(a.second).at("probability").get<double>() ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("http round-trip: health, score, content-type enforcement, burst") {
    serve::ScoringServer server(trained_toy_model());
    const int port = 18472;
    std::thread runner([&] {
        serve::ServerOptions options;
        options.port = port;
        server.run(options);
    });
    REQUIRE(server.wait_until_ready(2000));

    httplib::Client client("127.0.0.1", port);
    auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body).at("status") == "ok");

    const std::string body = R"({"url": "http://192.0.2.7/login"})";
    auto scored = client.Post("/score", body, "application/json");
    REQUIRE(scored);
    CHECK(scored->status == 200);
    const double p = json::parse(scored->body).at("probability").get<double>();

    auto wrong_type = client.Post("/score", body, "text/plain");
    REQUIRE(wrong_type);
    CHECK(wrong_type->status == 400);

    // Concurrent identical requests all succeed with identical bodies.
    std::vector<std::string> responses(16);
    std::vector<std::thread> workers;
    for (auto& slot : responses) {
        workers.emplace_back([&slot, port, &body] {
            httplib::Client worker_client("127.0.0.1", port);
            auto res = worker_client.Post("/score", body, "application/json");
            if (res && res->status == 200) slot = res->body;
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& response : responses) {
        CHECK(response == scored->body);
        CHECK(json::parse(response).at("probability").get<double>() == p);
    }

    server.stop();
    runner.join();
}
