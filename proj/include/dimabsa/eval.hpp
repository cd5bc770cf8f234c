#pragma once

#include "dimabsa/corpus.hpp"
#include "dimabsa/prompting.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace dimabsa {

enum class DimMode { V, A, VA };

std::string_view to_string(DimMode dims);

// "rounded to an integer" leaves the .5 tie rule open; half-up is the
// default, half-even selectable for diagnosing discrepancies.
enum class RoundingRule { half_up, half_even };

long long round_intensity(double value, RoundingRule rule = RoundingRule::half_up);

struct MatchCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

// One-to-one exact matching within a single sample: tuples agree on aspect,
// (category when task=quadruple,) opinion, and the rounded intensity key for
// the requested dims. Each gold tuple matches at most one prediction.
MatchCounts match_sets(const std::vector<Tuple>& pred, const std::vector<Tuple>& gold, TupleMode task,
                       DimMode dims, RoundingRule rule = RoundingRule::half_up);

struct EvalRow {
    TupleMode task;
    DimMode dims;
    MatchCounts counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::string config_hash;
};

enum class TaskSelector { triplet, quadruple, both };

TaskSelector task_selector_from_string(std::string_view s);

// Corpus-level scoring: per-sample matching summed over the gold sample set,
// P = tp/(tp+fp), R = tp/(tp+fn) (0 on zero denominators), F1 = 2PR/(P+R).
// Rows cover dims V, A, VA for each selected task. Predictions for an id
// absent from gold are an error; gold ids without predictions count as
// all-missed.
EvalReport score_predictions(const std::map<std::string, std::vector<Tuple>>& pred,
                             const std::vector<Sample>& gold, TaskSelector task,
                             RoundingRule rule = RoundingRule::half_up);

// File front end. Gold uses the dataset record schema; predictions may be
// either a dataset-schema file or a stage-output prediction file (JSONL).
EvalReport score_files(const std::filesystem::path& pred_path, const std::filesystem::path& gold_path,
                       TaskSelector task, RoundingRule rule = RoundingRule::half_up);

// Rows per (task, dims) with precision / recall / f1 columns.
std::string format_report_table(const EvalReport& report);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json_file(const std::filesystem::path& path);

} // namespace dimabsa
