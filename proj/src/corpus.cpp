#include "dimabsa/corpus.hpp"

#include "dimabsa/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_set>

namespace dimabsa {

using nlohmann::json;

std::string format_intensity(const Intensity& i) {
    return format_two_decimals(i.valence) + "#" + format_two_decimals(i.arousal);
}

namespace {

// Parses one intensity component. Strict: d.dd only. Lenient: d, d.d or d.dd
// (two integer digits allowed so that out-of-range values like "12.00" reach
// the range check instead of being reported as malformed).
bool parse_component(std::string_view s, bool strict, double& out) {
    std::size_t dot = s.find('.');
    std::string_view int_part = dot == std::string_view::npos ? s : s.substr(0, dot);
    std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    auto all_digits = [](std::string_view p) {
        return !p.empty() && std::all_of(p.begin(), p.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (strict) {
        if (int_part.size() != 1 || frac_part.size() != 2) return false;
    } else {
        if (int_part.size() < 1 || int_part.size() > 2) return false;
        if (dot != std::string_view::npos && (frac_part.size() < 1 || frac_part.size() > 2)) return false;
    }
    if (!all_digits(int_part)) return false;
    if (dot != std::string_view::npos && !all_digits(frac_part)) return false;
    double v = 0.0;
    for (char c : int_part) v = v * 10.0 + (c - '0');
    double scale = 0.1;
    for (char c : frac_part) {
        v += (c - '0') * scale;
        scale /= 10.0;
    }
    out = v;
    return true;
}

IntensityParse parse_intensity_impl(std::string_view text, bool strict, Intensity& out) {
    text = trim(text);
    std::size_t sep = text.find('#');
    if (sep == std::string_view::npos) return IntensityParse::malformed;
    Intensity i;
    if (!parse_component(trim(text.substr(0, sep)), strict, i.valence) ||
        !parse_component(trim(text.substr(sep + 1)), strict, i.arousal))
        return IntensityParse::malformed;
    if (!i.in_range()) return IntensityParse::out_of_range;
    out = i;
    return IntensityParse::ok;
}

} // namespace

Intensity parse_intensity_strict(std::string_view text) {
    Intensity i;
    switch (parse_intensity_impl(text, /*strict=*/true, i)) {
    case IntensityParse::ok: return i;
    case IntensityParse::out_of_range:
        throw ValidationError("intensity out of range [1.0, 9.0]: " + std::string(text));
    default:
        throw ValidationError("malformed intensity (expected d.dd#d.dd): " + std::string(text));
    }
}

IntensityParse parse_intensity_lenient(std::string_view text, Intensity& out) {
    return parse_intensity_impl(text, /*strict=*/false, out);
}

const std::vector<std::string>& Category::all() {
    static const std::vector<std::string> categories = {
        "餐厅#概括", "餐厅#价格", "餐厅#杂项",     "食物#价格",
        "食物#品质", "食物#份量与款式", "饮料#价格", "饮料#品质",
        "饮料#份量与款式", "氛围#概括", "服务#概括", "地点#概括",
    };
    return categories;
}

std::optional<Category> Category::from_text(std::string_view text) {
    const auto& cats = all();
    std::string_view trimmed = trim(text);
    for (std::size_t i = 0; i < cats.size(); ++i)
        if (cats[i] == trimmed) return Category(i);
    return std::nullopt;
}

std::string Category::entity() const {
    const std::string& t = text();
    return t.substr(0, t.find('#'));
}

std::string Category::attribute() const {
    const std::string& t = text();
    return t.substr(t.find('#') + 1);
}

Triplet to_triplet(const Quadruple& q) { return Triplet{q.aspect, q.opinion, q.intensity}; }

Tuple to_tuple(const Quadruple& q) { return Tuple{q.aspect, q.category, q.opinion, q.intensity}; }

Tuple to_tuple(const Triplet& t) { return Tuple{t.aspect, std::nullopt, t.opinion, t.intensity}; }

namespace {

[[noreturn]] void record_error(std::size_t record, std::string_view field, std::string_view what) {
    std::ostringstream msg;
    msg << what << " at record " << record;
    if (!field.empty()) msg << " (field " << field << ")";
    throw ValidationError(msg.str());
}

Quadruple parse_label(const json& label, std::size_t record, std::size_t label_idx) {
    std::string field = "labels[" + std::to_string(label_idx) + "]";
    if (!label.is_array() || label.size() != 4 ||
        !std::all_of(label.begin(), label.end(), [](const json& v) { return v.is_string(); }))
        record_error(record, field, "label must be a 4-element string array");
    std::string aspect{trim(label[0].get<std::string>())};
    if (aspect.empty()) record_error(record, field, "empty aspect");
    auto category = Category::from_text(label[1].get<std::string>());
    if (!category) record_error(record, field, "unknown category");
    std::string opinion{trim(label[2].get<std::string>())};
    if (opinion.empty()) record_error(record, field, "empty opinion");
    Intensity intensity;
    try {
        intensity = parse_intensity_strict(label[3].get<std::string>());
    } catch (const ValidationError& e) {
        record_error(record, field, e.what());
    }
    return Quadruple{std::move(aspect), *category, std::move(opinion), intensity};
}

} // namespace

std::vector<Sample> load_dataset(const std::filesystem::path& path, DatasetSchema schema,
                                 std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw ValidationError("dataset must be a top-level record list: " + path.string());

    std::vector<Sample> samples;
    samples.reserve(doc.size());
    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 0; r < doc.size(); ++r) {
        const json& rec = doc[r];
        if (!rec.is_object()) record_error(r, "", "record must be an object");
        if (!rec.contains("id") || !rec["id"].is_string()) record_error(r, "id", "missing or non-string id");
        if (!rec.contains("text") || !rec["text"].is_string())
            record_error(r, "text", "missing or non-string text");

        Sample s;
        s.id = rec["id"].get<std::string>();
        s.text = rec["text"].get<std::string>();
        if (s.id.empty()) record_error(r, "id", "empty id");
        if (trim(s.text).empty()) record_error(r, "text", "empty text");
        if (!seen_ids.insert(s.id).second) record_error(r, "id", "duplicate id \"" + s.id + "\"");

        if (rec.contains("labels")) {
            const json& labels = rec["labels"];
            if (!labels.is_array()) record_error(r, "labels", "labels must be an array");
            if (schema == DatasetSchema::test && !labels.empty())
                record_error(r, "labels", "labels present under test schema");
            for (std::size_t l = 0; l < labels.size(); ++l) {
                Quadruple q = parse_label(labels[l], r, l);
                if (q.aspect != "NULL" && s.text.find(q.aspect) == std::string::npos && warnings)
                    warnings->push_back("record " + std::to_string(r) + " (" + s.id + "): aspect \"" +
                                        q.aspect + "\" is not a substring of the sentence");
                s.gold.push_back(std::move(q));
            }
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

std::string serialize_dataset(const std::vector<Sample>& samples) {
    json doc = json::array();
    for (const Sample& s : samples) {
        json labels = json::array();
        for (const Quadruple& q : s.gold)
            labels.push_back({q.aspect, q.category.text(), q.opinion, format_intensity(q.intensity)});
        doc.push_back({{"id", s.id}, {"text", s.text}, {"labels", std::move(labels)}});
    }
    return doc.dump(2) + "\n";
}

void save_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples) {
    atomic_write_file(path, serialize_dataset(samples));
}

std::vector<OpinionLexiconEntry> build_lexicon(const std::vector<Sample>& train) {
    struct Acc {
        double valence_sum = 0.0;
        double arousal_sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::string, Acc> groups; // ordered: deterministic output
    for (const Sample& s : train) {
        for (const Quadruple& q : s.gold) {
            Acc& a = groups[std::string(trim(q.opinion))];
            a.valence_sum += q.intensity.valence;
            a.arousal_sum += q.intensity.arousal;
            a.count += 1;
        }
    }
    std::vector<OpinionLexiconEntry> lexicon;
    lexicon.reserve(groups.size());
    for (const auto& [opinion, acc] : groups)
        lexicon.push_back({opinion, acc.valence_sum / static_cast<double>(acc.count),
                           acc.arousal_sum / static_cast<double>(acc.count), acc.count});
    return lexicon;
}

std::string serialize_lexicon(const std::vector<OpinionLexiconEntry>& lexicon) {
    json doc = json::array();
    for (const auto& e : lexicon)
        doc.push_back({{"opinion", e.opinion},
                       {"mean_valence", e.mean_valence},
                       {"mean_arousal", e.mean_arousal},
                       {"count", e.count}});
    return doc.dump(2) + "\n";
}

std::vector<OpinionLexiconEntry> load_lexicon(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("invalid lexicon JSON in " + path.string() + ": " + e.what());
    }
    std::vector<OpinionLexiconEntry> lexicon;
    for (const json& rec : doc)
        lexicon.push_back({rec.at("opinion").get<std::string>(), rec.at("mean_valence").get<double>(),
                           rec.at("mean_arousal").get<double>(), rec.at("count").get<std::size_t>()});
    return lexicon;
}

namespace {

std::vector<HistogramBin> make_bins() {
    std::vector<HistogramBin> bins;
    for (int i = 0; i < 16; ++i)
        bins.push_back({1.0 + 0.5 * i, 1.0 + 0.5 * (i + 1), 0});
    return bins;
}

void bump(std::vector<HistogramBin>& bins, double v) {
    auto idx = static_cast<std::size_t>((v - 1.0) / 0.5);
    if (idx >= bins.size()) idx = bins.size() - 1; // 9.0 folds into the top bin
    bins[idx].count += 1;
}

} // namespace

StatsReport dataset_stats(const std::vector<Sample>& data) {
    StatsReport report;
    report.valence_hist = make_bins();
    report.arousal_hist = make_bins();
    for (const Sample& s : data) {
        for (const Quadruple& q : s.gold) {
            bump(report.valence_hist, q.intensity.valence);
            bump(report.arousal_hist, q.intensity.arousal);
            report.pairs.emplace_back(q.intensity.valence, q.intensity.arousal);
        }
    }
    return report;
}

std::string format_stats(const StatsReport& stats) {
    std::ostringstream out;
    auto section = [&out](const char* name, const std::vector<HistogramBin>& bins) {
        out << "# " << name << "\tbin_lo\tbin_hi\tcount\n";
        for (const HistogramBin& b : bins)
            out << name << "\t" << format_two_decimals(b.lo) << "\t" << format_two_decimals(b.hi) << "\t"
                << b.count << "\n";
    };
    section("valence", stats.valence_hist);
    section("arousal", stats.arousal_hist);
    out << "# pairs\tvalence\tarousal\n";
    for (const auto& [v, a] : stats.pairs)
        out << "pair\t" << format_two_decimals(v) << "\t" << format_two_decimals(a) << "\n";
    return out.str();
}

} // namespace dimabsa
