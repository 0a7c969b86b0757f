// Deterministic CSV emission and the JSON metadata sidecar written next to
// every run output.
#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "cqed/quantum_core.hpp"

namespace cqed {

// Comma-separated, '.' decimal, fixed %.12g formatting so identical inputs
// produce byte-identical files.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);

    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

    static std::string num(double v);
    static std::string num(int v);

  private:
    std::ofstream out_;
    size_t n_cols_ = 0;
};

struct SidecarInfo {
    std::string command;
    std::map<std::string, std::string> resolved_config;
    int n_cav = 0, n_trans = 0;
    double wall_seconds = 0.0;
    int n_points = 0, n_failed = 0;
    std::map<std::string, std::string> extra;   // command-specific scalars
    std::vector<std::string> warnings;
};

void write_sidecar(const std::string& path, const SidecarInfo& info);

}  // namespace cqed
