#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rfnet::io {

struct AccuracyCell {
    std::string method;
    int fold = 0;
    std::uint64_t seed = 0;
    int shots = 0;
    double accuracy = 0.0;
};

struct EpisodeRow {
    std::string method;
    int fold = 0;
    std::uint64_t seed = 0;
    int shots = 0;
    int episode = 0;
    int env_id = 0;
    int correct = 0;
    int total = 0;
};

struct LossRow {
    std::string method;
    int fold = 0;
    std::uint64_t seed = 0;
    int episode = 0;
    double loss = 0.0;
};

struct MetricsReport {
    std::vector<AccuracyCell> cells;
    std::vector<EpisodeRow> episodes;
    std::vector<LossRow> loss_trace;

    double mean_accuracy(const std::string& method, int shots) const;
};

// Writes metrics.csv, episodes.csv, loss_trace.csv and summary.txt with a
// stable column order; identical reports produce byte-identical files.
void emit_report(const MetricsReport& report, const std::string& dir);

}  // namespace rfnet::io
