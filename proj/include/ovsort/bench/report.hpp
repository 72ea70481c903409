#pragma once

// Rendering and parsing of grid results. CSV and JSON round-trip exactly:
// doubles are written with 17 significant digits.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ovsort/bench/experiment.hpp"
#include "ovsort/errors.hpp"

namespace ovsort::bench {

namespace detail {

inline std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

inline std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

// Splits CSV text into records of fields (RFC 4180 quoting).
inline std::vector<std::vector<std::string>> csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            record.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                record.push_back(std::move(field));
                records.push_back(std::move(record));
            }
            record.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw FormatError("csv: unterminated quoted field");
    if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

template <class U>
U parse_number(const std::string& text, const char* what) {
    U value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw FormatError(std::string("csv: bad ") + what + " '" + text + "'");
    }
    return value;
}

// strtod rather than from_chars<double>, which libstdc++ 11 lacks.
inline double parse_double(const std::string& text, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw FormatError(std::string("csv: bad ") + what + " '" + text + "'");
    }
    return v;
}

} // namespace detail

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> columns{
        "algo", "n", "p", "r", "a", "s", "base", "threads", "trials", "seconds", "baseline_s", "sample_s",
        "splitter_s", "split_s", "merge_s", "expansion", "max_bucket", "status", "message"};
    return columns;
}

inline std::string render_csv(const std::vector<ResultRow>& rows) {
    std::string out;
    const auto& columns = csv_columns();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out += (i ? "," : "") + columns[i];
    }
    out += "\n";
    for (const auto& row : rows) {
        using detail::exact;
        const std::vector<std::string> fields{
            detail::csv_field(row.algo), std::to_string(row.n), std::to_string(row.p), std::to_string(row.r),
            row.a ? exact(*row.a) : "", std::to_string(row.s), detail::csv_field(row.base),
            std::to_string(row.threads), std::to_string(row.trials), exact(row.seconds), exact(row.phases.baseline),
            exact(row.phases.sample), exact(row.phases.splitter), exact(row.phases.split), exact(row.phases.merge),
            exact(row.expansion), std::to_string(row.max_bucket), std::string(to_string(row.status)),
            detail::csv_field(row.message)};
        for (std::size_t i = 0; i < fields.size(); ++i) {
            out += (i ? "," : "") + fields[i];
        }
        out += "\n";
    }
    return out;
}

inline std::vector<ResultRow> parse_csv(std::string_view text) {
    const auto records = detail::csv_records(text);
    if (records.empty() || records.front() != csv_columns()) {
        throw FormatError("csv: missing or unexpected header");
    }
    std::vector<ResultRow> rows;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        if (f.size() != csv_columns().size()) {
            throw FormatError("csv: record " + std::to_string(i) + " has " + std::to_string(f.size()) + " fields");
        }
        using detail::parse_double;
        using U = std::size_t;
        ResultRow row;
        row.algo = f[0];
        row.n = detail::parse_number<U>(f[1], "n");
        row.p = detail::parse_number<U>(f[2], "p");
        row.r = detail::parse_number<U>(f[3], "r");
        if (!f[4].empty()) row.a = parse_double(f[4], "a");
        row.s = detail::parse_number<U>(f[5], "s");
        row.base = f[6];
        row.threads = detail::parse_number<U>(f[7], "threads");
        row.trials = detail::parse_number<U>(f[8], "trials");
        row.seconds = parse_double(f[9], "seconds");
        row.phases = {parse_double(f[10], "baseline_s"), parse_double(f[11], "sample_s"),
                      parse_double(f[12], "splitter_s"), parse_double(f[13], "split_s"), parse_double(f[14], "merge_s")};
        row.expansion = parse_double(f[15], "expansion");
        row.max_bucket = detail::parse_number<U>(f[16], "max_bucket");
        row.status = parse_status(f[17]);
        row.message = f[18];
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json to_json(const ResultRow& row) {
    nlohmann::json j;
    j["algo"] = row.algo;
    j["n"] = row.n;
    j["p"] = row.p;
    j["r"] = row.r;
    j["a"] = row.a ? nlohmann::json(*row.a) : nlohmann::json(nullptr);
    j["s"] = row.s;
    j["base"] = row.base;
    j["threads"] = row.threads;
    j["trials"] = row.trials;
    j["seconds"] = row.seconds;
    j["phases"] = {{"baseline", row.phases.baseline},
                   {"sample", row.phases.sample},
                   {"splitter", row.phases.splitter},
                   {"split", row.phases.split},
                   {"merge", row.phases.merge}};
    j["expansion"] = row.expansion;
    j["max_bucket"] = row.max_bucket;
    j["status"] = std::string(to_string(row.status));
    j["message"] = row.message;
    return j;
}

inline ResultRow row_from_json(const nlohmann::json& j) {
    try {
        ResultRow row;
        row.algo = j.at("algo").get<std::string>();
        row.n = j.at("n").get<std::size_t>();
        row.p = j.at("p").get<std::size_t>();
        row.r = j.at("r").get<std::size_t>();
        if (!j.at("a").is_null()) row.a = j.at("a").get<double>();
        row.s = j.at("s").get<std::size_t>();
        row.base = j.at("base").get<std::string>();
        row.threads = j.at("threads").get<std::size_t>();
        row.trials = j.at("trials").get<std::size_t>();
        row.seconds = j.at("seconds").get<double>();
        const auto& ph = j.at("phases");
        row.phases = {ph.at("baseline").get<double>(), ph.at("sample").get<double>(), ph.at("splitter").get<double>(),
                      ph.at("split").get<double>(), ph.at("merge").get<double>()};
        row.expansion = j.at("expansion").get<double>();
        row.max_bucket = j.at("max_bucket").get<std::size_t>();
        row.status = parse_status(j.at("status").get<std::string>());
        row.message = j.at("message").get<std::string>();
        return row;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("json: ") + e.what());
    }
}

inline std::string render_json(const std::vector<ResultRow>& rows) {
    nlohmann::json array = nlohmann::json::array();
    for (const auto& row : rows) array.push_back(to_json(row));
    return array.dump(2) + "\n";
}

inline std::vector<ResultRow> parse_json(std::string_view text) {
    nlohmann::json array;
    try {
        array = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("json: ") + e.what());
    }
    if (!array.is_array()) throw FormatError("json: expected an array of rows");
    std::vector<ResultRow> rows;
    for (const auto& j : array) rows.push_back(row_from_json(j));
    return rows;
}

namespace detail {

struct Pivot {
    std::vector<std::string> label_names;
    std::string column_name;
    std::vector<std::vector<std::string>> labels;
    std::vector<std::string> columns;
    std::map<std::pair<std::size_t, std::size_t>, std::string> cells;
};

inline std::string a_label(const std::optional<double>& a) {
    if (!a) return "lg^2";
    std::ostringstream out;
    out << *a;
    return out.str();
}

// Row labels and column value for one result row. Pipelines pivot on p
// (one column per p); random sampling with explicit exponents pivots on a.
inline std::pair<std::vector<std::string>, std::string> coordinates(const ResultRow& row, bool by_exponent,
                                                                    std::vector<std::string>& names) {
    std::vector<std::string> label{std::to_string(row.n)};
    names = {"n"};
    if (by_exponent) {
        label.push_back(std::to_string(row.p));
        names.push_back("p");
    }
    label.push_back(row.base);
    names.push_back("base");
    if (row.algo == "mc") {
        label.push_back(std::to_string(row.threads));
        names.push_back("t");
    }
    if (row.r > 0) {
        label.push_back(std::to_string(row.r));
        names.push_back("r");
    }
    if (row.algo == "baseline") return {label, "time"};
    return {label, by_exponent ? "a=" + a_label(row.a) : "p=" + std::to_string(row.p)};
}

template <class CellText>
Pivot pivot(const std::vector<ResultRow>& rows, CellText text) {
    Pivot t;
    bool by_exponent = false;
    for (const auto& row : rows) {
        if (row.a) by_exponent = true;
    }
    for (const auto& row : rows) {
        std::vector<std::string> names;
        auto [label, column] = coordinates(row, by_exponent, names);
        if (names.size() > t.label_names.size()) t.label_names = names;
        auto li = std::find(t.labels.begin(), t.labels.end(), label);
        if (li == t.labels.end()) li = t.labels.insert(li, label);
        auto ci = std::find(t.columns.begin(), t.columns.end(), column);
        if (ci == t.columns.end()) ci = t.columns.insert(ci, column);
        t.cells[{static_cast<std::size_t>(li - t.labels.begin()), static_cast<std::size_t>(ci - t.columns.begin())}] =
            text(row);
    }
    return t;
}

inline std::string format_pivot(const Pivot& t) {
    const std::size_t ncols = t.label_names.size() + t.columns.size();
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header = t.label_names;
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    grid.push_back(header);
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
        std::vector<std::string> line = t.labels[i];
        line.resize(t.label_names.size());
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            const auto it = t.cells.find({i, j});
            line.push_back(it == t.cells.end() ? "" : it->second);
        }
        grid.push_back(line);
    }
    std::vector<std::size_t> width(ncols, 0);
    for (const auto& line : grid) {
        for (std::size_t j = 0; j < ncols; ++j) width[j] = std::max(width[j], line[j].size());
    }
    std::string out;
    for (const auto& line : grid) {
        for (std::size_t j = 0; j < ncols; ++j) {
            if (j) out += "  ";
            const std::string& cell = line[j];
            // Labels left-aligned, numbers right-aligned.
            if (j < t.label_names.size()) {
                out += cell + std::string(width[j] - cell.size(), ' ');
            } else {
                out += std::string(width[j] - cell.size(), ' ') + cell;
            }
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    return out;
}

} // namespace detail

/// Column-aligned tables in the layout of the published timing tables: mean
/// seconds per (n, base) row and p column, or per (n, p, base) row and
/// exponent column when the grid varies a. Failed cells carry a trailing
/// '!', skipped cells show '-'.
inline std::string render_table(const std::vector<ResultRow>& rows) {
    if (rows.empty()) return "(no results)\n";
    auto time_cell = [](const ResultRow& row) -> std::string {
        if (row.status == RowStatus::skipped) return "-";
        return detail::fixed(row.seconds, 3) + (row.status == RowStatus::fail ? "!" : "");
    };
    std::string out = "wall-clock seconds (" + rows.front().algo + ", mean of trials)\n";
    out += detail::format_pivot(detail::pivot(rows, time_cell));

    if (rows.front().algo != "baseline") {
        auto expansion_cell = [](const ResultRow& row) -> std::string {
            if (row.status == RowStatus::skipped) return "-";
            return detail::fixed(row.expansion, 3);
        };
        out += "\nmax bucket / (n/p), worst trial\n";
        out += detail::format_pivot(detail::pivot(rows, expansion_cell));
    }

    std::size_t failed = 0, skipped = 0;
    for (const auto& row : rows) {
        failed += row.status == RowStatus::fail;
        skipped += row.status == RowStatus::skipped;
    }
    out += "\n" + std::to_string(rows.size() - failed - skipped) + " cells verified";
    if (failed) out += ", " + std::to_string(failed) + " FAILED";
    if (skipped) out += ", " + std::to_string(skipped) + " skipped (invalid parameters)";
    out += "\n";
    for (const auto& row : rows) {
        if (row.status == RowStatus::fail) {
            out += "  FAILED n=" + std::to_string(row.n) + " p=" + std::to_string(row.p) + " base=" + row.base +
                   ": " + row.message + "\n";
        }
    }
    return out;
}

inline std::string render(const std::vector<ResultRow>& rows, Format format) {
    switch (format) {
    case Format::table: return render_table(rows);
    case Format::csv: return render_csv(rows);
    case Format::json: return render_json(rows);
    }
    return {};
}

} // namespace ovsort::bench
