#include "peacegrid/remote.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/parallel.hpp"

namespace peacegrid {

namespace {

using nlohmann::json;

struct SplitEndpoint {
    std::string base;    // scheme://host[:port]
    std::string prefix;  // path prefix, no trailing slash
};

SplitEndpoint split_endpoint(const std::string& endpoint) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) {
        throw InputError("endpoint '" + endpoint + "' needs a scheme, e.g. https://host");
    }
    const auto slash = endpoint.find('/', scheme + 3);
    SplitEndpoint out;
    if (slash == std::string::npos) {
        out.base = endpoint;
    } else {
        out.base = endpoint.substr(0, slash);
        out.prefix = endpoint.substr(slash);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::vector<EmbeddingVector> parse_batch(const std::string& body, std::size_t expected,
                                         std::size_t dim) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ServiceError(std::string("embedding service returned malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array()) {
        throw ServiceError("embedding service response has no 'data' array");
    }
    const auto& data = doc["data"];
    if (data.size() != expected) {
        throw ServiceError("embedding service returned " + std::to_string(data.size()) +
                           " vectors for " + std::to_string(expected) + " inputs");
    }

    std::vector<EmbeddingVector> out(expected);
    std::vector<bool> filled(expected, false);
    for (const auto& item : data) {
        if (!item.contains("index") || !item["index"].is_number_integer() ||
            !item.contains("embedding") || !item["embedding"].is_array()) {
            throw ServiceError("embedding service response item lacks index/embedding");
        }
        const auto index = item["index"].get<long long>();
        if (index < 0 || static_cast<std::size_t>(index) >= expected) {
            throw ServiceError("embedding service returned out-of-range index " +
                               std::to_string(index));
        }
        if (filled[index]) {
            throw ServiceError("embedding service returned duplicate index " +
                               std::to_string(index));
        }
        const auto& values = item["embedding"];
        if (values.size() != dim) {
            throw ServiceError("dimension mismatch (expected " + std::to_string(dim) + ", got " +
                               std::to_string(values.size()) + ")");
        }
        std::vector<float> buffer(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (!values[i].is_number()) {
                throw ServiceError("embedding service returned a non-numeric component");
            }
            buffer[i] = static_cast<float>(values[i].get<double>());
        }
        try {
            out[index] = normalize(buffer);
        } catch (const InputError& e) {
            throw ServiceError(std::string("embedding service returned an invalid vector: ") +
                               e.what());
        }
        filled[index] = true;
    }
    return out;
}

}  // namespace

std::vector<EmbeddingVector> embed_remote(const std::vector<std::string>& texts,
                                          const EmbedderConfig& cfg, const std::string& endpoint,
                                          const std::string& credential, RemoteStats* stats,
                                          std::size_t initial_backoff_ms) {
    cfg.validate();
    if (credential.empty()) throw InputError("missing credential for the embedding service");
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) {
            throw InputError("text " + std::to_string(i) + " is empty; nothing to embed");
        }
    }
    if (texts.empty()) return {};

    const SplitEndpoint split = split_endpoint(endpoint);
    const std::string path = split.prefix + "/v1/embeddings";
    const httplib::Headers headers = {{"Authorization", "Bearer " + credential}};

    const std::size_t n_batches = (texts.size() + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<std::vector<EmbeddingVector>> results(n_batches);
    std::atomic<std::size_t> retries{0};

    parallel_for(n_batches, cfg.max_in_flight, [&](std::size_t b) {
        const std::size_t begin = b * cfg.batch_size;
        const std::size_t end = std::min(begin + cfg.batch_size, texts.size());

        json request;
        request["model"] = cfg.model_name;
        request["input"] = json::array();
        for (std::size_t i = begin; i < end; ++i) request["input"].push_back(texts[i]);
        const std::string body = request.dump();

        httplib::Client client(split.base);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        client.set_write_timeout(120, 0);

        for (std::size_t attempt = 0;; ++attempt) {
            auto res = client.Post(path, headers, body, "application/json");
            std::string failure;
            if (!res) {
                failure = "transport error: " + httplib::to_string(res.error());
            } else if (res->status == 200) {
                results[b] = parse_batch(res->body, end - begin, cfg.dim);
                return;
            } else if (retryable_status(res->status)) {
                failure = "HTTP " + std::to_string(res->status) + ": " + body_excerpt(res->body);
            } else {
                throw ServiceError("embedding service rejected batch " + std::to_string(b) +
                                   " with HTTP " + std::to_string(res->status) + ": " +
                                   body_excerpt(res->body));
            }

            if (attempt >= cfg.max_retries) {
                throw ServiceError("embedding service failed after " +
                                   std::to_string(cfg.max_retries) + " retries (" + failure + ")");
            }
            retries.fetch_add(1, std::memory_order_relaxed);
            const std::size_t doubling = std::min<std::size_t>(attempt, 10);
            std::this_thread::sleep_for(
                std::chrono::milliseconds(initial_backoff_ms << doubling));
        }
    });

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& batch : results) {
        for (auto& vec : batch) out.push_back(std::move(vec));
    }
    if (stats) {
        stats->batches = n_batches;
        stats->retries = retries.load();
    }
    return out;
}

}  // namespace peacegrid
