#include <algorithm>
#include <cstdio>

#include "qorpilot/cli/cli.hpp"

namespace qorpilot::cli {

namespace {

void sort_rows(std::vector<ReportRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.pdk, a.design) < std::tie(b.pdk, b.design);
    });
}

std::string num(double v) {
    char buf[64];
    if (v == static_cast<int64_t>(v))
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    else
        std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

}  // namespace

std::string render_report_text(std::vector<ReportRow> rows, const std::string& metric) {
    sort_rows(rows);
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"platform", "design", "base", "new", "delta%"});
    for (const auto& r : rows)
        cells.push_back({r.pdk, r.design, num(r.base), num(r.new_value),
                         flow::format_delta(r.delta_pct)});
    std::vector<size_t> widths(5, 0);
    for (const auto& row : cells)
        for (size_t c = 0; c < 5; ++c) widths[c] = std::max(widths[c], row[c].size());
    std::string out;
    out += "# metric: " + metric + "\n";
    for (size_t r = 0; r < cells.size(); ++r) {
        for (size_t c = 0; c < 5; ++c) {
            std::string cell = cells[r][c];
            bool right = c >= 2;
            if (right) out += std::string(widths[c] - cell.size(), ' ') + cell;
            else out += cell + std::string(widths[c] - cell.size(), ' ');
            out += c + 1 < 5 ? "  " : "";
        }
        out += "\n";
    }
    return out;
}

std::string render_report_json(std::vector<ReportRow> rows, const std::string& metric) {
    sort_rows(rows);
    Json j;
    j["metric"] = metric;
    Json arr = Json::array();
    for (const auto& r : rows) {
        Json row;
        row["platform"] = r.pdk;
        row["design"] = r.design;
        row["base"] = r.base;
        row["new"] = r.new_value;
        row["delta_pct"] = flow::round2(r.delta_pct);
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    return canonical_dump(j);
}

}  // namespace qorpilot::cli
