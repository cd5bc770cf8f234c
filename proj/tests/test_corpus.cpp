#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dimabsa/corpus.hpp"
#include "dimabsa/util.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace dimabsa;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    std::filesystem::path path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path;
}

const std::filesystem::path kFixture50 = std::filesystem::path(DIMABSA_FIXTURE_DIR) / "train_50.json";

} // namespace

TEST_CASE("intensity formats with exactly two decimals") {
    CHECK(format_intensity({7.5, 7.25}) == "7.50#7.25");
    CHECK(format_intensity({1.0, 9.0}) == "1.00#9.00");
}

TEST_CASE("strict intensity parsing") {
    Intensity i = parse_intensity_strict("7.50#7.25");
    CHECK(i.valence == doctest::Approx(7.50));
    CHECK(i.arousal == doctest::Approx(7.25));
    CHECK_THROWS_AS(parse_intensity_strict("7.5#7.25"), ValidationError);  // one decimal
    CHECK_THROWS_AS(parse_intensity_strict("7.50"), ValidationError);      // no separator
    CHECK_THROWS_AS(parse_intensity_strict("0.50#5.00"), ValidationError); // below range
    CHECK_THROWS_AS(parse_intensity_strict("9.01#5.00"), ValidationError); // above range
}

TEST_CASE("lenient intensity accepts 0-2 decimals and guards the range") {
    Intensity i;
    CHECK(parse_intensity_lenient("7#6", i) == IntensityParse::ok);
    CHECK(i.valence == doctest::Approx(7.0));
    CHECK(parse_intensity_lenient("7.5#7.25", i) == IntensityParse::ok);
    CHECK(i.arousal == doctest::Approx(7.25));
    CHECK(parse_intensity_lenient("12.00#5.00", i) == IntensityParse::out_of_range);
    CHECK(parse_intensity_lenient("abc#5.00", i) == IntensityParse::malformed);
    CHECK(parse_intensity_lenient("7.123#5.00", i) == IntensityParse::malformed);
}

TEST_CASE("intensity text round-trip stays within 0.005 per component") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(1.0, 9.0);
    for (int i = 0; i < 2000; ++i) {
        Intensity x{value(rng), value(rng)};
        std::string text = format_intensity(x);
        CHECK(text.size() == 9); // d.dd#d.dd
        Intensity back = parse_intensity_strict(text);
        CHECK(std::abs(back.valence - x.valence) <= 0.005);
        CHECK(std::abs(back.arousal - x.arousal) <= 0.005);
    }
}

TEST_CASE("category closed set round-trips and rejects outsiders") {
    CHECK(Category::all().size() == 12);
    for (const std::string& text : Category::all()) {
        auto c = Category::from_text(text);
        REQUIRE(c.has_value());
        CHECK(c->text() == text);
        CHECK(c->entity() + "#" + c->attribute() == text);
    }
    CHECK_FALSE(Category::from_text("食物#口感").has_value());
    CHECK_FALSE(Category::from_text("食物").has_value());
    CHECK_FALSE(Category::from_text("").has_value());
    CHECK(Category::from_text(" 食物#品质 ").has_value()); // trimmed
}

TEST_CASE("load_dataset parses the running example") {
    auto path = write_temp(
        "one_record.json",
        R"([{"id":"S1","text":"独家的鲔鱼抹酱超好吃。","labels":[["鲔鱼抹酱","食物#品质","超好吃","7.50#7.25"]]}])");
    auto samples = load_dataset(path, DatasetSchema::train);
    REQUIRE(samples.size() == 1);
    REQUIRE(samples[0].gold.size() == 1);
    const Quadruple& q = samples[0].gold[0];
    CHECK(q.aspect == "鲔鱼抹酱");
    CHECK(q.category.text() == "食物#品质");
    CHECK(q.opinion == "超好吃");
    CHECK(format_intensity(q.intensity) == "7.50#7.25");
}

TEST_CASE("load_dataset edge cases") {
    SUBCASE("empty record list") {
        CHECK(load_dataset(write_temp("empty.json", "[]"), DatasetSchema::train).empty());
    }
    SUBCASE("unknown category points at the record") {
        auto path = write_temp(
            "badcat.json", R"([{"id":"S1","text":"x","labels":[["a","食物#口感","好","6.00#6.00"]]}])");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_dataset(path, DatasetSchema::train)),
                             doctest::Contains("unknown category at record 0"), ValidationError);
    }
    SUBCASE("duplicate id") {
        auto path = write_temp("dup.json", R"([{"id":"S1","text":"a"},{"id":"S1","text":"b"}])");
        CHECK_THROWS_WITH_AS(static_cast<void>(load_dataset(path, DatasetSchema::train)),
                             doctest::Contains("duplicate id"), ValidationError);
    }
    SUBCASE("labels rejected under the test schema") {
        auto path = write_temp(
            "leak.json", R"([{"id":"S1","text":"x","labels":[["a","食物#品质","好","6.00#6.00"]]}])");
        CHECK_THROWS_AS(static_cast<void>(load_dataset(path, DatasetSchema::test)), ValidationError);
        auto empty_ok = write_temp("noleak.json", R"([{"id":"S1","text":"x","labels":[]}])");
        CHECK(load_dataset(empty_ok, DatasetSchema::test).size() == 1);
    }
    SUBCASE("aspect not a substring is a warning, not an error") {
        auto path = write_temp(
            "warn.json",
            R"([{"id":"S1","text":"味道不错。","labels":[["装修","氛围#概括","不错","6.00#5.00"]]}])");
        std::vector<std::string> warnings;
        auto samples = load_dataset(path, DatasetSchema::train, &warnings);
        CHECK(samples.size() == 1);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("装修") != std::string::npos);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(static_cast<void>(load_dataset("/nonexistent/x.json", DatasetSchema::train)),
                        ValidationError);
    }
}

TEST_CASE("dataset round-trips through serialization") {
    auto samples = load_dataset(kFixture50, DatasetSchema::train);
    REQUIRE(samples.size() == 50);
    auto copy = write_temp("roundtrip.json", serialize_dataset(samples));
    CHECK(load_dataset(copy, DatasetSchema::train) == samples);
}

TEST_CASE("lexicon means") {
    SUBCASE("singleton mean equals the value") {
        Sample s{"S1", "独家的鲔鱼抹酱超好吃。",
                 {{"鲔鱼抹酱", *Category::from_text("食物#品质"), "超好吃", {7.50, 7.25}}}};
        auto lexicon = build_lexicon({s});
        REQUIRE(lexicon.size() == 1);
        CHECK(lexicon[0] == OpinionLexiconEntry{"超好吃", 7.50, 7.25, 1});
    }
    SUBCASE("two occurrences average") {
        Category c = *Category::from_text("食物#品质");
        Sample s1{"S1", "好吃。", {{"NULL", c, "好吃", {6.00, 6.00}}}};
        Sample s2{"S2", "也好吃。", {{"NULL", c, "好吃", {8.00, 7.00}}}};
        auto lexicon = build_lexicon({s1, s2});
        REQUIRE(lexicon.size() == 1);
        CHECK(lexicon[0].mean_valence == doctest::Approx(7.00));
        CHECK(lexicon[0].mean_arousal == doctest::Approx(6.50));
        CHECK(lexicon[0].count == 2);
    }
    SUBCASE("empty train set") { CHECK(build_lexicon({}).empty()); }
    SUBCASE("opinions are trimmed before grouping") {
        Category c = *Category::from_text("食物#品质");
        Sample s{"S1", "好吃。", {{"NULL", c, " 好吃 ", {6.00, 6.00}}, {"NULL", c, "好吃", {8.00, 7.00}}}};
        auto lexicon = build_lexicon({s});
        REQUIRE(lexicon.size() == 1);
        CHECK(lexicon[0].count == 2);
    }
}

TEST_CASE("lexicon conservation against a brute-force accumulation oracle") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> n_tuples(0, 4);
    std::vector<Sample> train;
    for (int i = 0; i < 120; ++i) {
        Sample s;
        s.id = "R" + std::to_string(i);
        s.text = "评论" + std::to_string(i);
        int n = n_tuples(rng);
        for (int j = 0; j < n; ++j) {
            auto t = oracle::random_tuple(rng, true);
            s.gold.push_back({t.aspect, *t.category, t.opinion, t.intensity});
        }
        train.push_back(std::move(s));
    }
    auto lexicon = build_lexicon(train);

    std::size_t total = 0;
    for (const Sample& s : train) total += s.gold.size();
    std::size_t counted = 0;
    for (const auto& e : lexicon) counted += e.count;
    CHECK(counted == total);

    // Second route: direct accumulation per opinion.
    for (const auto& entry : lexicon) {
        double v_sum = 0, a_sum = 0, v_min = 10, v_max = 0;
        std::size_t n = 0;
        for (const Sample& s : train)
            for (const Quadruple& q : s.gold)
                if (std::string(trim(q.opinion)) == entry.opinion) {
                    v_sum += q.intensity.valence;
                    a_sum += q.intensity.arousal;
                    v_min = std::min(v_min, q.intensity.valence);
                    v_max = std::max(v_max, q.intensity.valence);
                    ++n;
                }
        REQUIRE(n == entry.count);
        CHECK(entry.mean_valence == doctest::Approx(v_sum / n).epsilon(1e-12));
        CHECK(entry.mean_arousal == doctest::Approx(a_sum / n).epsilon(1e-12));
        CHECK(entry.mean_valence >= v_min - 1e-12);
        CHECK(entry.mean_valence <= v_max + 1e-12);
    }
}

TEST_CASE("dataset stats") {
    Category c = *Category::from_text("食物#品质");
    SUBCASE("single quadruple lands in its bins") {
        Sample s{"S1", "x", {{"a", c, "好", {7.50, 7.25}}}};
        StatsReport r = dataset_stats({s});
        REQUIRE(r.valence_hist.size() == 16);
        for (const auto& bin : r.valence_hist) CHECK(bin.count == ((bin.lo == 7.5) ? 1u : 0u));
        for (const auto& bin : r.arousal_hist) CHECK(bin.count == ((bin.lo == 7.0) ? 1u : 0u));
        REQUIRE(r.pairs.size() == 1);
        CHECK(r.pairs[0] == std::pair{7.50, 7.25});
    }
    SUBCASE("triplicated quadruple counts three times") {
        Quadruple q{"a", c, "好", {7.50, 7.25}};
        Sample s{"S1", "x", {q, q, q}};
        StatsReport r = dataset_stats({s});
        for (const auto& bin : r.valence_hist) CHECK(bin.count == ((bin.lo == 7.5) ? 3u : 0u));
        CHECK(r.pairs.size() == 3);
    }
    SUBCASE("9.0 folds into the top bin") {
        Sample s{"S1", "x", {{"a", c, "好", {9.00, 1.00}}}};
        StatsReport r = dataset_stats({s});
        CHECK(r.valence_hist.back().count == 1);
        CHECK(r.arousal_hist.front().count == 1);
    }
    SUBCASE("mass conservation over random data") {
        std::mt19937_64 rng(23);
        std::vector<Sample> data;
        for (int i = 0; i < 100; ++i) {
            auto t = oracle::random_tuple(rng, true);
            data.push_back(
                {"R" + std::to_string(i), "x", {{t.aspect, *t.category, t.opinion, t.intensity}}});
        }
        StatsReport r = dataset_stats(data);
        std::size_t v_mass = 0, a_mass = 0;
        for (const auto& b : r.valence_hist) v_mass += b.count;
        for (const auto& b : r.arousal_hist) a_mass += b.count;
        CHECK(v_mass == 100);
        CHECK(a_mass == 100);
        CHECK(r.pairs.size() == 100);
    }
}

TEST_CASE("stats text output carries both histograms and the pairs section") {
    auto samples = load_dataset(kFixture50, DatasetSchema::train);
    std::string text = format_stats(dataset_stats(samples));
    CHECK(text.find("# valence\tbin_lo\tbin_hi\tcount") != std::string::npos);
    CHECK(text.find("# arousal") != std::string::npos);
    CHECK(text.find("# pairs") != std::string::npos);
    CHECK(count_occurrences(text, "\npair\t") == 58);
}

TEST_CASE("unicode trim handles full-width whitespace") {
    CHECK(trim("　 好吃  ") == "好吃");
    CHECK(trim("   ") == "");
    CHECK(trim("好吃") == "好吃");
}
