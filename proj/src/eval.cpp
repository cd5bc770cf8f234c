#include "dimabsa/eval.hpp"

#include "dimabsa/inference.hpp"
#include "dimabsa/util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace dimabsa {

using nlohmann::json;

std::string_view to_string(DimMode dims) {
    switch (dims) {
    case DimMode::V: return "V";
    case DimMode::A: return "A";
    case DimMode::VA: return "VA";
    }
    return "VA";
}

long long round_intensity(double value, RoundingRule rule) {
    double base = std::floor(value);
    double frac = value - base;
    if (rule == RoundingRule::half_up) return static_cast<long long>(std::floor(value + 0.5));
    if (frac > 0.5) return static_cast<long long>(base) + 1;
    if (frac < 0.5) return static_cast<long long>(base);
    long long lo = static_cast<long long>(base);
    return lo % 2 == 0 ? lo : lo + 1;
}

namespace {

// Exact-match key for one tuple under (task, dims). Fields are joined with
// a separator that cannot occur in the data.
std::string match_key(const Tuple& t, TupleMode task, DimMode dims, RoundingRule rule) {
    std::string key{trim(t.aspect)};
    key += '\x1f';
    if (task == TupleMode::quadruple) {
        if (!t.category)
            throw ValidationError("triplet predictions cannot be scored as quadruples (missing category)");
        key += t.category->text();
        key += '\x1f';
    }
    key += trim(t.opinion);
    key += '\x1f';
    if (dims == DimMode::V || dims == DimMode::VA)
        key += std::to_string(round_intensity(t.intensity.valence, rule));
    key += '\x1f';
    if (dims == DimMode::A || dims == DimMode::VA)
        key += std::to_string(round_intensity(t.intensity.arousal, rule));
    return key;
}

} // namespace

MatchCounts match_sets(const std::vector<Tuple>& pred, const std::vector<Tuple>& gold, TupleMode task,
                       DimMode dims, RoundingRule rule) {
    std::unordered_map<std::string, std::size_t> gold_counts;
    for (const Tuple& t : gold) gold_counts[match_key(t, task, dims, rule)] += 1;

    MatchCounts counts;
    for (const Tuple& t : pred) {
        auto it = gold_counts.find(match_key(t, task, dims, rule));
        if (it != gold_counts.end() && it->second > 0) {
            it->second -= 1;
            counts.tp += 1;
        } else {
            counts.fp += 1;
        }
    }
    counts.fn = gold.size() - counts.tp;
    return counts;
}

namespace {

EvalRow make_row(TupleMode task, DimMode dims, MatchCounts counts) {
    EvalRow row{task, dims, counts, 0.0, 0.0, 0.0};
    if (counts.tp + counts.fp > 0)
        row.precision = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp);
    if (counts.tp + counts.fn > 0)
        row.recall = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
    if (row.precision + row.recall > 0.0)
        row.f1 = 2.0 * row.precision * row.recall / (row.precision + row.recall);
    return row;
}

} // namespace

TaskSelector task_selector_from_string(std::string_view s) {
    if (s == "triplet") return TaskSelector::triplet;
    if (s == "quadruple") return TaskSelector::quadruple;
    if (s == "both") return TaskSelector::both;
    throw ValidationError("unknown task (expected triplet|quadruple|both): " + std::string(s));
}

EvalReport score_predictions(const std::map<std::string, std::vector<Tuple>>& pred,
                             const std::vector<Sample>& gold, TaskSelector task, RoundingRule rule) {
    std::unordered_map<std::string, const Sample*> gold_by_id;
    for (const Sample& s : gold) gold_by_id.emplace(s.id, &s);
    for (const auto& [id, _] : pred)
        if (!gold_by_id.count(id))
            throw ValidationError("prediction id \"" + id + "\" is not present in the gold set");

    std::vector<TupleMode> tasks;
    if (task == TaskSelector::triplet || task == TaskSelector::both) tasks.push_back(TupleMode::triplet);
    if (task == TaskSelector::quadruple || task == TaskSelector::both)
        tasks.push_back(TupleMode::quadruple);

    static const std::vector<Tuple> kNoTuples;
    EvalReport report;
    for (TupleMode t : tasks) {
        for (DimMode dims : {DimMode::V, DimMode::A, DimMode::VA}) {
            MatchCounts counts;
            for (const Sample& s : gold) {
                auto it = pred.find(s.id);
                const std::vector<Tuple>& p = it == pred.end() ? kNoTuples : it->second;
                std::vector<Tuple> g;
                g.reserve(s.gold.size());
                for (const Quadruple& q : s.gold) g.push_back(to_tuple(q));
                counts += match_sets(p, g, t, dims, rule);
            }
            report.rows.push_back(make_row(t, dims, counts));
        }
    }
    return report;
}

namespace {

std::map<std::string, std::vector<Tuple>> load_prediction_map(const std::filesystem::path& path) {
    std::string content = read_text_file(path);
    std::string_view head = trim(content);
    if (!head.empty() && head.front() == '[') {
        // Dataset-schema predictions (e.g. a gold file replayed as system output).
        std::map<std::string, std::vector<Tuple>> out;
        for (const Sample& s : load_dataset(path, DatasetSchema::train)) {
            auto& tuples = out[s.id];
            for (const Quadruple& q : s.gold) tuples.push_back(to_tuple(q));
        }
        return out;
    }
    return predictions_to_map(read_predictions(path).predictions);
}

} // namespace

EvalReport score_files(const std::filesystem::path& pred_path, const std::filesystem::path& gold_path,
                       TaskSelector task, RoundingRule rule) {
    std::vector<Sample> gold = load_dataset(gold_path, DatasetSchema::train);
    return score_predictions(load_prediction_map(pred_path), gold, task, rule);
}

std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "task        dims  precision  recall  f1\n";
    char line[128];
    for (const EvalRow& row : report.rows) {
        std::snprintf(line, sizeof(line), "%-10s  %-4s  %9.3f  %6.3f  %5.3f\n",
                      std::string(to_string(row.task)).c_str(), std::string(to_string(row.dims)).c_str(),
                      row.precision, row.recall, row.f1);
        out << line;
    }
    return out.str();
}

std::string report_to_json(const EvalReport& report) {
    json rows = json::array();
    for (const EvalRow& row : report.rows)
        rows.push_back({{"task", std::string(to_string(row.task))},
                        {"dims", std::string(to_string(row.dims))},
                        {"precision", row.precision},
                        {"recall", row.recall},
                        {"f1", row.f1},
                        {"tp", row.counts.tp},
                        {"fp", row.counts.fp},
                        {"fn", row.counts.fn}});
    return json{{"config_hash", report.config_hash}, {"rows", std::move(rows)}}.dump(2) + "\n";
}

EvalReport report_from_json_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("invalid report JSON in " + path.string() + ": " + e.what());
    }
    EvalReport report;
    report.config_hash = doc.value("config_hash", "");
    for (const json& r : doc.at("rows")) {
        EvalRow row;
        row.task = tuple_mode_from_string(r.at("task").get<std::string>());
        row.dims = r.at("dims") == "V" ? DimMode::V : r.at("dims") == "A" ? DimMode::A : DimMode::VA;
        row.precision = r.at("precision").get<double>();
        row.recall = r.at("recall").get<double>();
        row.f1 = r.at("f1").get<double>();
        row.counts = {r.value("tp", std::size_t{0}), r.value("fp", std::size_t{0}),
                      r.value("fn", std::size_t{0})};
        report.rows.push_back(row);
    }
    return report;
}

} // namespace dimabsa
