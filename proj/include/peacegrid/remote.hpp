#pragma once

#include <atomic>
#include <cstddef>
#include <string>
#include <vector>

#include "peacegrid/embed.hpp"

namespace peacegrid {

// Run-log counters for one embed_remote call.
struct RemoteStats {
    std::size_t batches = 0;
    std::size_t retries = 0;
};

// OpenAI-compatible embeddings client: POST {endpoint}/v1/embeddings with a
// bearer credential, texts split into cfg.batch_size batches, up to
// cfg.max_in_flight batches in flight. 429 and 5xx are retried with
// exponential backoff up to cfg.max_retries; other 4xx are fatal. Output
// vectors are normalized and paired to texts in input order.
// initial_backoff_ms exists so tests exercising retries stay fast.
std::vector<EmbeddingVector> embed_remote(const std::vector<std::string>& texts,
                                          const EmbedderConfig& cfg, const std::string& endpoint,
                                          const std::string& credential,
                                          RemoteStats* stats = nullptr,
                                          std::size_t initial_backoff_ms = 200);

}  // namespace peacegrid
