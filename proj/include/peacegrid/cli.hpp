#pragma once

#include <cstdint>
#include <string>

#include "peacegrid/classify.hpp"
#include "peacegrid/embed.hpp"

namespace peacegrid {

// Effective settings for one invocation: defaults, overlaid by the optional
// JSON config file, overlaid by command-line flags (flags win).
struct RunConfig {
    EmbedderConfig embedder;
    DecisionRule rule;
    double threshold = 0.5;
    std::uint64_t seed = 42;
    std::string endpoint = "https://api.openai.com";
    std::size_t n_threads = 0;  // 0 = hardware concurrency

    std::string articles_path;
    std::string labels_path;
    std::string store_path;
    std::string out_dir;
};

// Exit codes: 0 success, 2 input or config error, 3 embedding service
// failure, 4 broken internal invariant.
int run_cli(int argc, const char* const* argv);

}  // namespace peacegrid
