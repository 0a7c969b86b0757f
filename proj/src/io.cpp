#include "cqed/io.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace cqed {

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    n_cols_ = columns.size();
    row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (n_cols_ && cells.size() != n_cols_)
        throw std::runtime_error("CsvWriter: column count mismatch");
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string CsvWriter::num(int v) { return std::to_string(v); }

void write_sidecar(const std::string& path, const SidecarInfo& info) {
    nlohmann::ordered_json j;
    j["command"] = info.command;
    j["version"] = "cqedsim 0.1.0";
    j["truncation"] = {{"n_cav", info.n_cav}, {"n_trans", info.n_trans}};
    j["wall_seconds"] = info.wall_seconds;
    j["points"] = {{"total", info.n_points}, {"failed", info.n_failed}};
    j["config"] = info.resolved_config;
    if (!info.extra.empty()) j["results"] = info.extra;
    if (!info.warnings.empty()) j["warnings"] = info.warnings;

    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_sidecar: cannot open " + path);
    f << j.dump(2) << '\n';
}

}  // namespace cqed
