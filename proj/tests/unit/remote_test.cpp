#include <atomic>
#include <chrono>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "peacegrid/embed.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/remote.hpp"

using namespace peacegrid;
using nlohmann::json;

namespace {

// Loopback embedding service stub; each test installs its own handler.
struct TestServer {
    httplib::Server svr;
    int port = 0;
    std::thread runner;

    void start() {
        port = svr.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        runner = std::thread([this] { svr.listen_after_bind(); });
        svr.wait_until_ready();
    }
    ~TestServer() {
        svr.stop();
        if (runner.joinable()) runner.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port); }
};

EmbedderConfig remote_cfg(std::size_t dim, std::size_t batch_size, std::size_t max_retries = 2,
                          std::size_t max_in_flight = 4) {
    EmbedderConfig cfg;
    cfg.kind = EmbedderKind::Remote;
    cfg.dim = dim;
    cfg.batch_size = batch_size;
    cfg.max_retries = max_retries;
    cfg.max_in_flight = max_in_flight;
    cfg.model_name = "stub-model";
    return cfg;
}

// Texts are "t<number>"; the stub embeds each as [number+1, 7] so the
// caller can prove which text produced which vector.
json embedding_for(const std::string& text, std::size_t index, std::size_t dim) {
    json item;
    item["index"] = index;
    json values = json::array();
    values.push_back(std::stod(text.substr(1)) + 1.0);
    for (std::size_t d = 1; d < dim; ++d) values.push_back(7.0);
    item["embedding"] = values;
    return item;
}

EmbeddingVector expected_vector(const std::string& text, std::size_t dim) {
    std::vector<float> raw(dim, 7.0f);
    raw[0] = static_cast<float>(std::stod(text.substr(1)) + 1.0);
    return normalize(raw);
}

}  // namespace

TEST_CASE("embed_remote posts batches and pairs vectors to texts in order") {
    TestServer server;
    std::atomic<int> hits{0};
    std::string seen_auth, seen_model, seen_path;
    std::mutex mu;

    server.svr.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        hits.fetch_add(1);
        {
            std::lock_guard<std::mutex> lock(mu);
            seen_auth = req.get_header_value("Authorization");
            seen_path = req.path;
        }
        const json body = json::parse(req.body);
        {
            std::lock_guard<std::mutex> lock(mu);
            seen_model = body["model"].get<std::string>();
        }
        json data = json::array();
        // Deliberately reversed: the client must reassemble by index.
        const auto& input = body["input"];
        for (std::size_t j = input.size(); j-- > 0;) {
            data.push_back(embedding_for(input[j].get<std::string>(), j, 2));
        }
        json out;
        out["data"] = data;
        res.set_content(out.dump(), "application/json");
    });
    server.start();

    const std::vector<std::string> texts = {"t0", "t1", "t2", "t3", "t4"};
    RemoteStats stats;
    const auto vectors =
        embed_remote(texts, remote_cfg(2, 2), server.endpoint(), "sekret", &stats, 1);

    REQUIRE(vectors.size() == texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(vectors[i].values == expected_vector(texts[i], 2).values);
    }
    CHECK(stats.batches == 3);
    CHECK(stats.retries == 0);
    CHECK(hits.load() == 3);
    CHECK(seen_auth == "Bearer sekret");
    CHECK(seen_model == "stub-model");
    CHECK(seen_path == "/v1/embeddings");
}

TEST_CASE("embed_remote honors a path prefix on the endpoint") {
    TestServer server;
    std::atomic<int> hits{0};
    server.svr.Post("/proxy/v1/embeddings",
                    [&](const httplib::Request& req, httplib::Response& res) {
                        hits.fetch_add(1);
                        const json body = json::parse(req.body);
                        json out;
                        out["data"] = json::array();
                        for (std::size_t j = 0; j < body["input"].size(); ++j) {
                            out["data"].push_back(
                                embedding_for(body["input"][j].get<std::string>(), j, 2));
                        }
                        res.set_content(out.dump(), "application/json");
                    });
    server.start();

    const auto vectors = embed_remote({"t5"}, remote_cfg(2, 10),
                                      server.endpoint() + "/proxy/", "k", nullptr, 1);
    REQUIRE(vectors.size() == 1);
    CHECK(vectors[0].values == expected_vector("t5", 2).values);
    CHECK(hits.load() == 1);
}

TEST_CASE("retryable statuses are retried with backoff until success") {
    TestServer server;
    std::atomic<int> hits{0};
    server.svr.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = hits.fetch_add(1);
        if (n < 2) {
            res.status = n == 0 ? 429 : 503;
            res.set_content("busy", "text/plain");
            return;
        }
        const json body = json::parse(req.body);
        json out;
        out["data"] = json::array();
        for (std::size_t j = 0; j < body["input"].size(); ++j) {
            out["data"].push_back(embedding_for(body["input"][j].get<std::string>(), j, 2));
        }
        res.set_content(out.dump(), "application/json");
    });
    server.start();

    RemoteStats stats;
    const auto vectors = embed_remote({"t0", "t1"}, remote_cfg(2, 10, 5), server.endpoint(),
                                      "k", &stats, 1);
    REQUIRE(vectors.size() == 2);
    CHECK(stats.retries == 2);
    CHECK(hits.load() == 3);
}

TEST_CASE("a persistent server error exhausts the retry budget") {
    TestServer server;
    std::atomic<int> hits{0};
    server.svr.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        hits.fetch_add(1);
        res.status = 500;
        res.set_content("db on fire", "text/plain");
    });
    server.start();

    CHECK_THROWS_WITH_AS(
        embed_remote({"t0"}, remote_cfg(2, 10, 2), server.endpoint(), "k", nullptr, 1),
        doctest::Contains("failed after 2 retries"), ServiceError);
    CHECK(hits.load() == 3);  // initial try + 2 retries
}

TEST_CASE("a client error is fatal on the first response") {
    TestServer server;
    std::atomic<int> hits{0};
    server.svr.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        hits.fetch_add(1);
        res.status = 400;
        res.set_content("{\"error\":\"bad model\"}", "application/json");
    });
    server.start();

    CHECK_THROWS_WITH_AS(
        embed_remote({"t0"}, remote_cfg(2, 10, 5), server.endpoint(), "k", nullptr, 1),
        doctest::Contains("rejected batch 0 with HTTP 400"), ServiceError);
    CHECK(hits.load() == 1);
}

TEST_CASE("malformed service responses carry a diagnosis") {
    TestServer server;
    std::string body = "not json";
    std::mutex mu;
    server.svr.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(mu);
        res.set_content(body, "application/json");
    });
    server.start();
    const auto call = [&](const std::string& response) {
        {
            std::lock_guard<std::mutex> lock(mu);
            body = response;
        }
        return embed_remote({"t0"}, remote_cfg(4, 10), server.endpoint(), "k", nullptr, 1);
    };

    CHECK_THROWS_WITH_AS(call("not json"), doctest::Contains("malformed JSON"), ServiceError);
    CHECK_THROWS_WITH_AS(call("{\"ok\":true}"), doctest::Contains("no 'data' array"),
                         ServiceError);
    CHECK_THROWS_WITH_AS(call("{\"data\":[]}"), doctest::Contains("returned 0 vectors for 1"),
                         ServiceError);
    CHECK_THROWS_WITH_AS(
        call("{\"data\":[{\"index\":0,\"embedding\":[1,2,3]}]}"),
        doctest::Contains("dimension mismatch (expected 4, got 3)"), ServiceError);
    CHECK_THROWS_WITH_AS(
        call("{\"data\":[{\"index\":5,\"embedding\":[1,2,3,4]}]}"),
        doctest::Contains("out-of-range index 5"), ServiceError);
    CHECK_THROWS_WITH_AS(
        call("{\"data\":[{\"index\":0,\"embedding\":[1,2,\"x\",4]}]}"),
        doctest::Contains("non-numeric component"), ServiceError);
    CHECK_THROWS_WITH_AS(
        call("{\"data\":[{\"index\":0,\"embedding\":[0,0,0,0]}]}"),
        doctest::Contains("invalid vector"), ServiceError);
}

TEST_CASE("embed_remote validates its own inputs before calling out") {
    const EmbedderConfig cfg = remote_cfg(2, 10);
    CHECK_THROWS_WITH_AS(embed_remote({"t0"}, cfg, "http://127.0.0.1:1", ""),
                         doctest::Contains("missing credential"), InputError);
    CHECK_THROWS_WITH_AS(embed_remote({"t0", ""}, cfg, "http://127.0.0.1:1", "k"),
                         doctest::Contains("text 1 is empty"), InputError);
    CHECK_THROWS_WITH_AS(embed_remote({"t0"}, cfg, "localhost:9", "k"),
                         doctest::Contains("needs a scheme"), InputError);
    CHECK(embed_remote({}, cfg, "http://127.0.0.1:1", "k").empty());
}

TEST_CASE("batches overlap up to max_in_flight") {
    TestServer server;
    server.svr.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(60));
        const json body = json::parse(req.body);
        json out;
        out["data"] = json::array();
        for (std::size_t j = 0; j < body["input"].size(); ++j) {
            out["data"].push_back(embedding_for(body["input"][j].get<std::string>(), j, 2));
        }
        res.set_content(out.dump(), "application/json");
    });
    server.start();

    const std::vector<std::string> texts = {"t0", "t1", "t2", "t3"};
    RemoteStats stats;
    const auto start = std::chrono::steady_clock::now();
    const auto vectors = embed_remote(texts, remote_cfg(2, 1, 2, 4), server.endpoint(), "k",
                                      &stats, 1);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();

    REQUIRE(vectors.size() == 4);
    CHECK(stats.batches == 4);
    // Four 60 ms sleeps in flight together must beat the 240 ms serial floor.
    CHECK(elapsed < 200);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        CHECK(vectors[i].values == expected_vector(texts[i], 2).values);
    }
}
