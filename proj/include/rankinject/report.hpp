#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankinject/common.hpp"
#include "rankinject/harness.hpp"
#include "rankinject/scoring.hpp"

// Machine-readable report files. Layouts mirror the published tables:
// repetition (injection type x base x reps), location (x position), generated
// (corpus vs generated bases), defense (per-corpus FPR and per-attack error).
// Rendering is deterministic: fixed row/column orders, fixed float formatting,
// no timestamps.

namespace rankinject {

struct RunMeta {
    uint64_t seed = 0;
    std::string config_hash;
    std::vector<std::string> scorer_ids;
    std::string tool_version{kToolVersion};
};

enum class ReportLayout { repetition, location, generated, defense };

inline ReportLayout report_layout_from(std::string_view s) {
    if (s == "repetition") return ReportLayout::repetition;
    if (s == "location") return ReportLayout::location;
    if (s == "generated") return ReportLayout::generated;
    if (s == "defense") return ReportLayout::defense;
    throw ParseError("unknown report layout: " + std::string(s));
}

inline std::string format_rate(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", pct);
    return buf;
}

// Empty-group marker, as an en dash.
inline constexpr std::string_view kEmptyCell = "\xE2\x80\x93";

inline std::string format_cell(const MetricReport& m) {
    if (m.n == 0 || !m.strict_rate || !m.relaxed_rate) return std::string(kEmptyCell);
    return format_rate(*m.strict_rate) + "/" + format_rate(*m.relaxed_rate);
}

struct RenderedReport {
    std::string csv;
    std::string markdown;
};

namespace detail {

inline int payload_order(const std::string& p) {
    if (p == "query") return 0;
    if (p == "keywords") return 1;
    if (p == "sentence") return 2;
    return 3;
}

inline int base_order(const std::string& b) {
    if (b == "random") return 0;
    if (b == "scrambled") return 1;
    if (b == "relevant") return 2;
    if (b.starts_with("gen-")) return 3 + std::atoi(b.c_str() + 4);
    return 10000;
}

inline int position_order(const std::string& p) {
    if (p == "start") return 0;
    if (p == "middle") return 1;
    return 2;
}

struct ColumnKey {
    std::string payload, base, position, reps;

    std::string label(ReportLayout layout) const {
        switch (layout) {
            case ReportLayout::repetition:
                return payload + "/" + base + " x" + reps;
            case ReportLayout::location:
                return payload + "/" + base + " " + position;
            default:
                return base;
        }
    }

    bool operator<(const ColumnKey& other) const {
        const auto rank = [](const ColumnKey& k) {
            return std::tuple(payload_order(k.payload), base_order(k.base),
                              position_order(k.position), k.reps);
        };
        return rank(*this) < rank(other);
    }
};

inline std::string meta_lines(const RunMeta& meta, std::string_view prefix) {
    std::string out;
    out += std::string(prefix) + "seed=" + std::to_string(meta.seed) + "\n";
    out += std::string(prefix) + "config=" + meta.config_hash + "\n";
    out += std::string(prefix) + "scorers=" + join(meta.scorer_ids, ";") + "\n";
    out += std::string(prefix) + "tool=" + meta.tool_version + "\n";
    return out;
}

}  // namespace detail

/// Renders grouped metrics for one or more scorers into a table whose columns
/// follow the requested layout. Metrics must be grouped by
/// {payload, base, position, reps}.
inline RenderedReport render_rank_report(
    ReportLayout layout, const std::map<std::string, std::vector<MetricReport>>& by_scorer,
    const RunMeta& meta) {
    if (layout == ReportLayout::defense)
        throw Error("render_rank_report: defense layout uses render_defense_report");
    if (by_scorer.empty()) throw Error("render_rank_report: no reports");

    auto row_filter = [&](const MetricReport& m) {
        const auto get = [&](const char* k) {
            auto it = m.group.find(k);
            return it == m.group.end() ? std::string() : it->second;
        };
        switch (layout) {
            case ReportLayout::repetition:
                return get("position").empty() || get("position") == "start";
            case ReportLayout::location:
                return get("reps").empty() || get("reps") == "1";
            default:  // generated: sentence injection at start x1
                return get("payload") == "sentence" &&
                       (get("position").empty() || get("position") == "start") &&
                       (get("reps").empty() || get("reps") == "1");
        }
    };

    std::map<detail::ColumnKey, bool> columns;
    std::map<std::string, std::map<std::string, const MetricReport*>> cells;  // scorer -> label
    for (const auto& [scorer, reports] : by_scorer) {
        for (const auto& m : reports) {
            if (!row_filter(m)) continue;
            detail::ColumnKey key;
            auto get = [&](const char* k) {
                auto it = m.group.find(k);
                return it == m.group.end() ? std::string() : it->second;
            };
            key.payload = get("payload");
            key.base = get("base");
            key.position = get("position");
            key.reps = get("reps");
            columns[key] = true;
            cells[scorer][key.label(layout)] = &m;
        }
    }
    if (columns.empty()) throw Error("render_rank_report: no rows match the layout filter");

    std::vector<std::string> labels;
    for (const auto& [key, _] : columns) labels.push_back(key.label(layout));

    RenderedReport out;
    out.csv = detail::meta_lines(meta, "# ");
    out.csv += "scorer";
    for (const auto& label : labels) out.csv += "," + label;
    out.csv += ",cell=strict/relaxed\n";

    out.markdown = detail::meta_lines(meta, "> ");
    out.markdown += "\n| scorer |";
    for (const auto& label : labels) out.markdown += " " + label + " |";
    out.markdown += "\n|---|";
    for (size_t i = 0; i < labels.size(); ++i) out.markdown += "---|";
    out.markdown += "\n";

    for (const auto& [scorer, row] : cells) {
        out.csv += scorer;
        out.markdown += "| " + scorer + " |";
        for (const auto& label : labels) {
            auto it = row.find(label);
            const std::string cell =
                it == row.end() ? std::string(kEmptyCell) : format_cell(*it->second);
            out.csv += "," + cell;
            out.markdown += " " + cell + " |";
        }
        out.csv += ",n=";
        size_t n = 0, failed = 0;
        for (const auto& [label, m] : row) {
            n += m->n;
            failed += m->failed;
        }
        out.csv += std::to_string(n) + ";failed=" + std::to_string(failed);
        out.csv += "\n";
        out.markdown += "\n";
    }
    return out;
}

/// False-positive and per-attack error rates of the defense classifier.
struct DefenseReport {
    // corpus name -> percent of benign passages flagged adversarial
    std::map<std::string, double> false_positive_pct;
    std::map<std::string, size_t> benign_counts;
    // attack type ("keyword", "query", "sentence-msmarco", "sentence-toxigen")
    // -> percent of adversarial passages missed, configurations equally weighted
    std::map<std::string, double> error_pct;
    std::map<std::string, size_t> attack_counts;
};

inline nlohmann::json to_json(const DefenseReport& r) {
    return nlohmann::json{{"false_positive_pct", r.false_positive_pct},
                          {"benign_counts", r.benign_counts},
                          {"error_pct", r.error_pct},
                          {"attack_counts", r.attack_counts}};
}

inline DefenseReport defense_report_from_json(const nlohmann::json& j) {
    DefenseReport r;
    r.false_positive_pct = j.at("false_positive_pct").get<std::map<std::string, double>>();
    r.benign_counts = j.value("benign_counts", std::map<std::string, size_t>{});
    r.error_pct = j.at("error_pct").get<std::map<std::string, double>>();
    r.attack_counts = j.value("attack_counts", std::map<std::string, size_t>{});
    return r;
}

inline RenderedReport render_defense_report(const DefenseReport& report, const RunMeta& meta) {
    static const std::vector<std::string> kAttackColumns{"keyword", "query", "sentence-msmarco",
                                                         "sentence-toxigen"};
    RenderedReport out;
    out.csv = detail::meta_lines(meta, "# ");
    out.csv += "dataset,false_positive";
    out.markdown = detail::meta_lines(meta, "> ");
    out.markdown += "\n| dataset | false positive |";
    for (const auto& col : kAttackColumns) {
        out.csv += "," + col;
        out.markdown += " " + col + " |";
    }
    out.csv += "\n";
    out.markdown += "\n|---|---|";
    for (size_t i = 0; i < kAttackColumns.size(); ++i) out.markdown += "---|";
    out.markdown += "\n";

    auto error_cell = [&](const std::string& col) {
        auto it = report.error_pct.find(col);
        return it == report.error_pct.end() ? std::string(kEmptyCell) : format_rate(it->second);
    };
    for (const auto& [dataset, fpr] : report.false_positive_pct) {
        out.csv += dataset + "," + format_rate(fpr);
        out.markdown += "| " + dataset + " | " + format_rate(fpr) + " |";
        for (const auto& col : kAttackColumns) {
            out.csv += "," + error_cell(col);
            out.markdown += " " + error_cell(col) + " |";
        }
        out.csv += "\n";
        out.markdown += "\n";
    }
    return out;
}

/// TREC run lines: `qid Q0 docid rank score runtag`.
inline void write_trec_run(const std::vector<ScoreRecord>& records, const std::string& runtag,
                           const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write run file: " + path);
    for (const auto& r : records) {
        char score[64];
        std::snprintf(score, sizeof(score), "%.6f", r.score);
        out << r.query_id << " Q0 " << r.passage_id << " " << (r.rank ? *r.rank : 0) << " "
            << score << " " << runtag << "\n";
    }
}

}  // namespace rankinject
