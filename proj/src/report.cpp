#include "rfnet/io/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace rfnet::io {

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream os(dir + "/" + name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + dir + "/" + name);
    return os;
}

}  // namespace

double MetricsReport::mean_accuracy(const std::string& method, int shots) const {
    double sum = 0;
    int n = 0;
    for (const auto& c : cells)
        if (c.method == method && c.shots == shots) {
            sum += c.accuracy;
            ++n;
        }
    return n ? sum / n : 0.0;
}

void emit_report(const MetricsReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);

    auto metrics = open_out(dir, "metrics.csv");
    metrics << "method,fold,seed,shots,accuracy\n";
    for (const auto& c : report.cells)
        metrics << c.method << ',' << c.fold << ',' << c.seed << ',' << c.shots << ','
                << fmt(c.accuracy) << '\n';

    auto episodes = open_out(dir, "episodes.csv");
    episodes << "method,fold,seed,shots,episode,env,correct,total\n";
    for (const auto& e : report.episodes)
        episodes << e.method << ',' << e.fold << ',' << e.seed << ',' << e.shots << ','
                 << e.episode << ',' << e.env_id << ',' << e.correct << ',' << e.total << '\n';

    auto loss = open_out(dir, "loss_trace.csv");
    loss << "method,fold,seed,episode,loss\n";
    for (const auto& l : report.loss_trace)
        loss << l.method << ',' << l.fold << ',' << l.seed << ',' << l.episode << ','
             << fmt(l.loss) << '\n';

    auto summary = open_out(dir, "summary.txt");
    std::map<std::string, std::map<int, std::pair<double, int>>> agg;
    for (const auto& c : report.cells) {
        auto& slot = agg[c.method][c.shots];
        slot.first += c.accuracy;
        slot.second += 1;
    }
    summary << "mean accuracy by method and shot count\n";
    for (const auto& [method, by_shots] : agg) {
        for (const auto& [shots, acc] : by_shots)
            summary << method << "  shots=" << shots << "  acc=" << fmt(acc.first / acc.second)
                    << "  (" << acc.second << " cells)\n";
    }
}

}  // namespace rfnet::io
