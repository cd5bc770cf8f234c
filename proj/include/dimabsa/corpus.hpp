#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dimabsa {

// Valence#arousal score pair on the nine-degree scale: 1 extremely negative /
// low arousal, 5 neutral / medium, 9 extremely positive / high arousal.
struct Intensity {
    double valence = 5.0;
    double arousal = 5.0;

    bool in_range() const {
        return valence >= 1.0 && valence <= 9.0 && arousal >= 1.0 && arousal <= 9.0;
    }
    friend bool operator==(const Intensity&, const Intensity&) = default;
};

// Canonical text form, exactly two decimals per component: "7.50#7.25".
std::string format_intensity(const Intensity& i);

// Strict corpus-file form: d.dd#d.dd with both components in [1.0, 9.0].
// Throws ValidationError otherwise.
Intensity parse_intensity_strict(std::string_view text);

enum class IntensityParse { ok, malformed, out_of_range };

// Lenient form for model output: integer or 1-2 decimals per component
// ("7#6", "7.5#7.25", "7.50#7.25"). Range is still enforced.
IntensityParse parse_intensity_lenient(std::string_view text, Intensity& out);

// One of the twelve predefined entity#attribute labels of the restaurant
// domain. Anything outside the closed set is rejected at parse time.
class Category {
  public:
    static const std::vector<std::string>& all();
    static std::optional<Category> from_text(std::string_view text);

    const std::string& text() const { return all()[index_]; }
    std::string entity() const;
    std::string attribute() const;

    friend bool operator==(const Category&, const Category&) = default;
    friend auto operator<=>(const Category&, const Category&) = default;

  private:
    explicit Category(std::size_t index) : index_(index) {}
    std::size_t index_;
};

struct Quadruple {
    std::string aspect; // literal "NULL" when the target is implicit
    Category category;
    std::string opinion;
    Intensity intensity;

    friend bool operator==(const Quadruple&, const Quadruple&) = default;
};

struct Triplet {
    std::string aspect;
    std::string opinion;
    Intensity intensity;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

Triplet to_triplet(const Quadruple& q);

// Common shape for parsed model output and scoring: a quadruple when the
// category is present, a triplet otherwise.
struct Tuple {
    std::string aspect;
    std::optional<Category> category;
    std::string opinion;
    Intensity intensity;

    friend bool operator==(const Tuple&, const Tuple&) = default;
};

Tuple to_tuple(const Quadruple& q);
Tuple to_tuple(const Triplet& t);

// One review sentence with its gold annotation (possibly empty).
struct Sample {
    std::string id;
    std::string text;
    std::vector<Quadruple> gold;

    friend bool operator==(const Sample&, const Sample&) = default;
};

enum class DatasetSchema { train, test };

// Loads a dataset file: a UTF-8 JSON list of records
//   {"id": str, "text": str, "labels": [[aspect, category, opinion, "v.vv#a.aa"], ...]}
// Validates every record; throws ValidationError carrying the record index and
// field on the first problem (unknown category, bad intensity, duplicate id,
// labels present under the test schema). Aspects that are neither "NULL" nor a
// substring of the sentence are collected as warnings, not errors.
std::vector<Sample> load_dataset(const std::filesystem::path& path, DatasetSchema schema,
                                 std::vector<std::string>* warnings = nullptr);

// Canonical serialization; load(save(x)) is identity on all fields.
std::string serialize_dataset(const std::vector<Sample>& samples);
void save_dataset(const std::filesystem::path& path, const std::vector<Sample>& samples);

// An opinion term with its mean scores over the training gold.
struct OpinionLexiconEntry {
    std::string opinion;
    double mean_valence = 0.0;
    double mean_arousal = 0.0;
    std::size_t count = 0;

    friend bool operator==(const OpinionLexiconEntry&, const OpinionLexiconEntry&) = default;
};

// One entry per distinct trimmed opinion string, means averaged over all
// occurrences. Sorted by opinion byte order. Sum of counts equals the number
// of gold quadruples ingested.
std::vector<OpinionLexiconEntry> build_lexicon(const std::vector<Sample>& train);

std::string serialize_lexicon(const std::vector<OpinionLexiconEntry>& lexicon);
std::vector<OpinionLexiconEntry> load_lexicon(const std::filesystem::path& path);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

// Half-open 0.5-wide bins over [1.0, 9.0]; 9.0 folds into the top bin.
struct StatsReport {
    std::vector<HistogramBin> valence_hist;
    std::vector<HistogramBin> arousal_hist;
    std::vector<std::pair<double, double>> pairs; // (valence, arousal) per quadruple
};

StatsReport dataset_stats(const std::vector<Sample>& data);

// Tab-separated sections (bin_lo, bin_hi, count) plus the raw pairs,
// suitable for external plotting.
std::string format_stats(const StatsReport& stats);

} // namespace dimabsa
