#pragma once

// Benchmark grid: every cell is run `trials` times on freshly generated
// input, timed around the sort only, and verified before it is reported.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ovsort/base_sort.hpp"
#include "ovsort/errors.hpp"
#include "ovsort/keys.hpp"
#include "ovsort/parallel.hpp"
#include "ovsort/pipeline.hpp"

namespace ovsort::bench {

enum class Algo { baseline, sqdet, sqran, mc };

inline std::string_view to_string(Algo algo) noexcept {
    switch (algo) {
    case Algo::baseline: return "baseline";
    case Algo::sqdet: return "sqdet";
    case Algo::sqran: return "sqran";
    case Algo::mc: return "mc";
    }
    return "?";
}

inline Algo parse_algo(std::string_view name) {
    if (name == "baseline") return Algo::baseline;
    if (name == "sqdet") return Algo::sqdet;
    if (name == "sqran") return Algo::sqran;
    if (name == "mc") return Algo::mc;
    throw UsageError("unknown algorithm '" + std::string(name) + "' (baseline, sqdet, sqran, mc)");
}

enum class Format { table, csv, json };

inline Format parse_format(std::string_view name) {
    if (name == "table") return Format::table;
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    throw UsageError("unknown format '" + std::string(name) + "' (table, csv, json)");
}

/// Largest n run without an explicit override.
inline constexpr std::size_t kDefaultMaxN = 8192000;

struct ExperimentSpec {
    Algo algo = Algo::sqran;
    std::vector<std::size_t> ns{1024000};
    std::vector<std::size_t> ps{64};
    /// Regular-sampling multipliers (sqdet, and mc in deterministic mode).
    std::vector<std::size_t> rs{1};
    /// Sample exponents; empty means the default s = ceil(lg^2 n).
    std::vector<double> as;
    std::vector<BaseSortKind> bases{BaseSortKind::qs};
    std::vector<std::size_t> threads{4};
    std::size_t trials = 3;
    std::uint64_t seed = 1;
    std::size_t key_length = 32;
    Format format = Format::table;
    SplitStrategy split = SplitStrategy::binary_search;
    bool parallel_merge = false;
    /// mc wraps regular sampling when set, random sampling otherwise.
    bool mc_deterministic = false;
    std::size_t max_n = kDefaultMaxN;
    Distribution distribution = Distribution::uniform_bytes;
    std::size_t distinct = 4;
    /// Fixed input (from a key file); replaces generation and the n list.
    std::shared_ptr<const KeyBuffer> input;
    /// Keep the sorted output of the last trial of the last cell.
    bool keep_output = false;
};

inline void validate(const ExperimentSpec& spec) {
    if (spec.trials == 0) throw UsageError("trials must be at least 1");
    if (!spec.input && spec.ns.empty()) throw UsageError("no problem sizes given");
    if (spec.bases.empty()) throw UsageError("no base sort given");
    if (spec.algo != Algo::baseline && spec.ps.empty()) throw UsageError("no p given");
    const bool needs_r = spec.algo == Algo::sqdet || (spec.algo == Algo::mc && spec.mc_deterministic);
    if (needs_r && spec.rs.empty()) throw UsageError("no r given");
    if (spec.algo == Algo::mc && spec.threads.empty()) throw UsageError("no thread count given");
    if (spec.key_length == 0 || spec.key_length > kMaxSortableKeyLength) {
        throw UsageError("key length must be in 1.." + std::to_string(kMaxSortableKeyLength));
    }
    const std::vector<std::size_t> sizes = spec.input ? std::vector<std::size_t>{spec.input->size()} : spec.ns;
    for (auto n : sizes) {
        if (n > spec.max_n) {
            throw UsageError("n = " + std::to_string(n) + " exceeds the cap of " + std::to_string(spec.max_n) +
                             "; raise it with --max-n-override");
        }
    }
}

enum class RowStatus { pass, fail, skipped };

inline std::string_view to_string(RowStatus status) noexcept {
    switch (status) {
    case RowStatus::pass: return "pass";
    case RowStatus::fail: return "fail";
    case RowStatus::skipped: return "skipped";
    }
    return "?";
}

inline RowStatus parse_status(std::string_view name) {
    if (name == "pass") return RowStatus::pass;
    if (name == "fail") return RowStatus::fail;
    if (name == "skipped") return RowStatus::skipped;
    throw FormatError("unknown row status '" + std::string(name) + "'");
}

/// One grid cell. Timings are means over trials; balance figures are the
/// worst trial. r = 0 and a = none when the coordinate does not apply.
struct ResultRow {
    std::string algo;
    std::size_t n = 0;
    std::size_t p = 1;
    std::size_t r = 0;
    std::optional<double> a;
    std::size_t s = 0;
    std::string base;
    std::size_t threads = 1;
    std::size_t trials = 0;
    double seconds = 0;
    PhaseTimes phases;
    double expansion = 0;
    std::size_t max_bucket = 0;
    RowStatus status = RowStatus::pass;
    std::string message;

    bool operator==(const ResultRow&) const = default;
};

struct GridResult {
    std::vector<ResultRow> rows;
    std::optional<KeyBuffer> output;

    bool all_passed() const noexcept {
        for (const auto& row : rows) {
            if (row.status == RowStatus::fail) return false;
        }
        return true;
    }
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t p, std::size_t trial) {
    return mix_seed({seed, n, p, trial});
}

namespace detail {

struct Cell {
    std::size_t n = 0;
    std::size_t p = 1;
    std::size_t r = 0;
    std::optional<double> a;
    BaseSortKind base = BaseSortKind::qs;
    std::size_t threads = 1;
};

inline std::vector<Cell> expand(const ExperimentSpec& spec) {
    const std::vector<std::size_t> sizes = spec.input ? std::vector<std::size_t>{spec.input->size()} : spec.ns;
    const bool regular = spec.algo == Algo::sqdet || (spec.algo == Algo::mc && spec.mc_deterministic);
    const std::vector<std::optional<double>> exponents = [&] {
        std::vector<std::optional<double>> out;
        if (spec.as.empty()) {
            out.push_back(std::nullopt);
        }
        for (double a : spec.as) out.push_back(a);
        return out;
    }();
    const std::vector<std::size_t> thread_counts =
        spec.algo == Algo::mc ? spec.threads : std::vector<std::size_t>{1};

    std::vector<Cell> cells;
    for (auto n : sizes) {
        for (auto base : spec.bases) {
            if (spec.algo == Algo::baseline) {
                cells.push_back({n, 1, 0, std::nullopt, base, 1});
                continue;
            }
            for (auto p : spec.ps) {
                for (auto t : thread_counts) {
                    if (regular) {
                        for (auto r : spec.rs) cells.push_back({n, p, r, std::nullopt, base, t});
                    } else {
                        for (const auto& a : exponents) cells.push_back({n, p, 0, a, base, t});
                    }
                }
            }
        }
    }
    return cells;
}

inline SortConfig inner_config(const ExperimentSpec& spec, const Cell& cell, std::uint64_t seed) {
    SortConfig cfg;
    cfg.p = cell.p;
    cfg.base = cell.base;
    cfg.split = spec.split;
    cfg.seed = seed;
    if (cell.r > 0) {
        cfg.mode = Deterministic{cell.r};
    } else {
        Randomized mode;
        mode.a = cell.a;
        cfg.mode = mode;
    }
    return cfg;
}

struct TrialOutcome {
    SortReport report;
    double seconds = 0;
};

template <std::size_t W>
TrialOutcome run_trial(const ExperimentSpec& spec, const Cell& cell, const KeyBuffer& input, std::uint64_t seed,
                       std::optional<KeyBuffer>* keep) {
    const auto keys = to_keys<W>(input);
    std::vector<Key<W>> work(keys);
    std::vector<Key<W>> out(keys.size());
    TrialOutcome outcome;

    const auto start = std::chrono::steady_clock::now();
    switch (spec.algo) {
    case Algo::baseline:
        base_sort(cell.base, std::span<Key<W>>(work), KeyLess{});
        break;
    case Algo::sqdet:
    case Algo::sqran:
        outcome.report = sort_into(std::span<Key<W>>(work), std::span<Key<W>>(out), inner_config(spec, cell, seed));
        break;
    case Algo::mc: {
        ParallelConfig pcfg;
        pcfg.threads = cell.threads;
        pcfg.parallel_merge = spec.parallel_merge;
        pcfg.inner = inner_config(spec, cell, seed);
        outcome.report = mc_sort_into(std::span<Key<W>>(work), std::span<Key<W>>(out), pcfg);
        break;
    }
    }
    outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (spec.algo == Algo::baseline) {
        out.swap(work);
        outcome.report.seconds.baseline = outcome.seconds;
        outcome.report.bucket_sizes = {out.size()};
        outcome.report.expansion = out.empty() ? 0.0 : 1.0;
    }
    verify_sorted<W>(keys, out, outcome.report);
    if (keep) {
        *keep = from_keys<W>(std::span<const Key<W>>(out), input.key_length());
    }
    return outcome;
}

/// Rough physical-memory check; the grid still runs if it fails.
inline bool fits_in_memory(std::size_t n, std::size_t key_length) {
    const long pages = ::sysconf(_SC_PHYS_PAGES);
    const long page_size = ::sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page_size <= 0) return true;
    std::size_t width = 8;
    while (width < key_length) width *= 2;
    // Raw input, padded input, work copy and output.
    const double need = static_cast<double>(n) * static_cast<double>(key_length + 3 * width);
    return need < static_cast<double>(pages) * static_cast<double>(page_size);
}

} // namespace detail

/// Runs every cell of the grid. Failures (bad parameters, verification
/// errors) are recorded in the row and the grid moves on. Progress and
/// warnings go to `log` when given.
inline GridResult run_grid(const ExperimentSpec& spec, std::ostream* log = nullptr) {
    validate(spec);
    GridResult result;
    const auto cells = detail::expand(spec);

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        ResultRow row;
        row.algo = std::string(to_string(spec.algo));
        row.n = cell.n;
        row.p = cell.p;
        row.r = cell.r;
        row.a = cell.a;
        row.base = std::string(to_string(cell.base));
        row.threads = cell.threads;

        if (log && !detail::fits_in_memory(cell.n, spec.key_length)) {
            *log << "warning: n = " << cell.n << " may not fit in physical memory\n";
        }
        const bool last_cell = c + 1 == cells.size();

        try {
            if (spec.algo != Algo::baseline) {
                const auto cfg = detail::inner_config(spec, cell, 0);
                ovsort::validate(cfg, cell.n);
                if (spec.algo == Algo::mc) {
                    ovsort::validate(ParallelConfig{cell.threads, spec.parallel_merge, cfg});
                }
                row.s = cell.r > 0 ? cell.r * cell.p : resolve_oversampling(std::get<Randomized>(cfg.mode), cell.n);
            }
        } catch (const ParameterError& e) {
            row.status = RowStatus::skipped;
            row.message = e.what();
            if (log) *log << "skipped " << row.algo << " n=" << row.n << " p=" << row.p << ": " << e.what() << "\n";
            result.rows.push_back(std::move(row));
            continue;
        }

        double seconds = 0;
        PhaseTimes phases;
        for (std::size_t trial = 0; trial < spec.trials; ++trial) {
            const std::uint64_t seed = trial_seed(spec.seed, cell.n, cell.p, trial);
            std::optional<KeyBuffer> generated;
            if (!spec.input) {
                generated = generate({cell.n, spec.key_length, spec.distribution, spec.distinct, seed});
            }
            const KeyBuffer& input = spec.input ? *spec.input : *generated;
            std::optional<KeyBuffer>* keep =
                spec.keep_output && last_cell && trial + 1 == spec.trials ? &result.output : nullptr;
            try {
                const auto outcome = with_key_width(input.key_length(), [&]<std::size_t W>() {
                    return detail::run_trial<W>(spec, cell, input, mix_seed({seed, 0x5eed}), keep);
                });
                seconds += outcome.seconds;
                phases.baseline += outcome.report.seconds.baseline;
                phases.sample += outcome.report.seconds.sample;
                phases.splitter += outcome.report.seconds.splitter;
                phases.split += outcome.report.seconds.split;
                phases.merge += outcome.report.seconds.merge;
                row.expansion = std::max(row.expansion, outcome.report.expansion);
                for (auto size : outcome.report.bucket_sizes) row.max_bucket = std::max(row.max_bucket, size);
                ++row.trials;
            } catch (const std::exception& e) {
                row.status = RowStatus::fail;
                row.message = "trial " + std::to_string(trial) + ": " + e.what();
                if (log) *log << "FAILED " << row.algo << " n=" << row.n << " p=" << row.p << ": " << row.message << "\n";
                break;
            }
        }
        if (row.trials > 0) {
            const double k = static_cast<double>(row.trials);
            row.seconds = seconds / k;
            row.phases = {phases.baseline / k, phases.sample / k, phases.splitter / k, phases.split / k,
                          phases.merge / k};
        }
        if (log) {
            *log << row.algo << " n=" << row.n << " p=" << row.p << " base=" << row.base << ": " << row.seconds
                 << " s\n";
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

} // namespace ovsort::bench
