#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dimabsa/inference.hpp"
#include "dimabsa/util.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <random>

using namespace dimabsa;

namespace {

const std::filesystem::path kFixtureDir = DIMABSA_FIXTURE_DIR;

InferenceOptions mock_options(TupleMode mode = TupleMode::quadruple) {
    InferenceOptions options;
    options.tmpl = default_template(mode);
    options.fixed_examples = builtin_fixed_examples();
    options.mode = mode;
    options.model_id = "mock-model";
    return options;
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("parser accepts the documented tuple line") {
    ParsedOutput out = parse_model_output("(鲔鱼抹酱, 食物#品质, 超好吃, 7.50#7.25)", TupleMode::quadruple);
    REQUIRE(out.tuples.size() == 1);
    CHECK(out.warnings.empty());
    CHECK(out.tuples[0].aspect == "鲔鱼抹酱");
    CHECK(out.tuples[0].category->text() == "食物#品质");
    CHECK(out.tuples[0].opinion == "超好吃");
    CHECK(format_intensity(out.tuples[0].intensity) == "7.50#7.25");
}

TEST_CASE("parser normalizes full-width punctuation and short decimals") {
    ParsedOutput out =
        parse_model_output("（鲔鱼抹酱，食物#品质，超好吃，7.5#7.25）", TupleMode::quadruple);
    REQUIRE(out.tuples.size() == 1);
    CHECK(out.warnings.empty());
    CHECK(format_intensity(out.tuples[0].intensity) == "7.50#7.25");

    ParsedOutput ascii = parse_model_output("(鲔鱼抹酱, 食物#品质, 超好吃, 7.50#7.25)",
                                            TupleMode::quadruple);
    CHECK(out.tuples == ascii.tuples);
}

TEST_CASE("parser skips malformed lines with one warning each") {
    ParsedOutput out =
        parse_model_output("garbage line\n(NULL, 服务#概括, 很好, 6.00#6.00)", TupleMode::quadruple);
    REQUIRE(out.tuples.size() == 1);
    CHECK(out.tuples[0].aspect == "NULL");
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("garbage line") != std::string::npos);
}

TEST_CASE("parser rejects out-of-range intensity rather than clamping") {
    ParsedOutput out = parse_model_output("(a, 食物#品质, 好, 12.00#5.00)", TupleMode::quadruple);
    CHECK(out.tuples.empty());
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("intensity out of range") != std::string::npos);
}

TEST_CASE("parser validates the category closed set in quadruple mode") {
    ParsedOutput out = parse_model_output("(a, 食物#口感, 好, 6.00#5.00)", TupleMode::quadruple);
    CHECK(out.tuples.empty());
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("unknown category") != std::string::npos);
}

TEST_CASE("parser accepts CRLF line endings") {
    ParsedOutput out = parse_model_output(
        "(NULL, 服务#概括, 很好, 6.00#6.00)\r\n(环境, 氛围#概括, 安静, 6.50#4.50)\r\n",
        TupleMode::quadruple);
    CHECK(out.warnings.empty());
    REQUIRE(out.tuples.size() == 2);
    CHECK(out.tuples[1].aspect == "环境");
}

TEST_CASE("parser trims whitespace inside and around a tuple line") {
    ParsedOutput out =
        parse_model_output("  ( 鲔鱼抹酱 , 食物#品质 , 超好吃 , 7.50#7.25 )  ", TupleMode::quadruple);
    REQUIRE(out.tuples.size() == 1);
    CHECK(out.tuples[0].aspect == "鲔鱼抹酱");
    CHECK(out.tuples[0].opinion == "超好吃");
}

TEST_CASE("parser handles triplet mode and arity mismatches") {
    ParsedOutput tri = parse_model_output("(鲔鱼抹酱, 超好吃, 7.50#7.25)", TupleMode::triplet);
    REQUIRE(tri.tuples.size() == 1);
    CHECK_FALSE(tri.tuples[0].category.has_value());

    ParsedOutput wrong = parse_model_output("(鲔鱼抹酱, 超好吃, 7.50#7.25)", TupleMode::quadruple);
    CHECK(wrong.tuples.empty());
    CHECK(wrong.warnings.size() == 1);
}

TEST_CASE("parser totality: every non-empty line becomes a tuple or a warning") {
    std::mt19937_64 rng(31);
    std::vector<std::string> fragments = {
        "(NULL, 服务#概括, 很好, 6.00#6.00)",
        "（环境，氛围#概括，安静，6.5#4.5）",
        "以上就是全部结果",
        "(too, few)",
        "(a, 食物#品质, 好, 99#1)",
        "",
        "   ",
        "(b, 食物#品质, , 6.00#6.00)",
        "输出：",
        "(c, 食物#品质, 好, 6.00#6.00) 附注",
    };
    for (int trial = 0; trial < 300; ++trial) {
        std::string raw;
        std::size_t non_empty = 0;
        std::size_t lines = rng() % 8;
        for (std::size_t i = 0; i < lines; ++i) {
            const std::string& f = fragments[rng() % fragments.size()];
            raw += f + "\n";
            if (!trim(f).empty()) ++non_empty;
        }
        ParsedOutput out = parse_model_output(raw, TupleMode::quadruple);
        CHECK(out.tuples.size() + out.warnings.size() == non_empty);
    }
}

TEST_CASE("render/parse round trip over the fixture, full-width variants included") {
    auto samples = load_dataset(kFixtureDir / "train_50.json", DatasetSchema::train);
    for (const Sample& s : samples) {
        if (s.gold.empty()) continue;
        IclExample ex = icl_from_sample(s);
        for (TupleMode mode : {TupleMode::quadruple, TupleMode::triplet}) {
            std::string rendered = render_example(ex, mode);
            ParsedOutput back = parse_model_output(rendered, mode);
            std::vector<Tuple> want = ex.tuples;
            if (mode == TupleMode::triplet)
                for (Tuple& t : want) t.category.reset();
            CHECK(back.tuples == want);

            std::string fullwidth = replace_all(rendered, "(", "（");
            fullwidth = replace_all(std::move(fullwidth), ")", "）");
            fullwidth = replace_all(std::move(fullwidth), ", ", "，");
            CHECK(parse_model_output(fullwidth, mode).tuples == want);
        }
    }
}

TEST_CASE("stage 1 predicts each sample from fixed demonstrations") {
    std::vector<Sample> test = {{"T1", "牛肉面不错。", {}}, {"T2", "太贵了。", {}}};
    MockChatClient mock;
    mock.set_default("(牛肉面, 食物#品质, 不错, 6.50#5.50)");

    RunManifest manifest;
    auto preds = predict_stage1(test, mock_options(), mock, manifest);
    REQUIRE(preds.size() == 2);
    CHECK(preds[0].sample_id == "T1");
    CHECK(preds[0].stage == Stage::coarse);
    REQUIRE(preds[0].tuples.size() == 1);
    CHECK(preds[0].tuples[0].opinion == "不错");
    CHECK(manifest.sample_status.at("T1") == "ok");
    CHECK(manifest.sample_status.at("T2") == "ok");
    CHECK(manifest.template_ids == std::vector<std::string>{"prompt2"});
    CHECK_FALSE(manifest.example_set_hash.empty());

    // the prompt embeds demonstrations and the test sentence
    auto prompts = mock.prompts();
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[0].find("牛肉面不错。") != std::string::npos);
    CHECK(prompts[0].find("独家的鲔鱼抹酱超好吃。") != std::string::npos);
}

TEST_CASE("stage 1 enforces the 3..4 demonstration count") {
    std::vector<Sample> test = {{"T1", "x", {}}};
    MockChatClient mock;
    mock.set_default("(a, 食物#品质, 好, 6.00#6.00)");
    RunManifest manifest;

    InferenceOptions two = mock_options();
    two.fixed_examples.resize(2);
    CHECK_THROWS_AS(static_cast<void>(predict_stage1(test, two, mock, manifest)), ValidationError);

    InferenceOptions three = mock_options();
    three.fixed_examples.resize(3);
    CHECK(predict_stage1(test, three, mock, manifest).size() == 1);
}

TEST_CASE("endpoint failures are isolated per sample") {
    std::vector<Sample> test = {{"T1", "好吃。", {}}};
    MockChatClient mock; // no default: every call fails
    RunManifest manifest;
    auto preds = predict_stage1(test, mock_options(), mock, manifest);
    REQUIRE(preds.size() == 1);
    CHECK(preds[0].failed);
    CHECK(preds[0].tuples.empty());
    CHECK(manifest.sample_status.at("T1") == "failed");
}

TEST_CASE("chat cache makes reruns endpoint-free and resumable") {
    auto cache = fresh_dir("chat_cache_test");
    std::vector<Sample> test = {{"T1", "牛肉面不错。", {}}, {"T2", "太贵了。", {}}};
    MockChatClient mock;
    mock.set_default("(NULL, 餐厅#概括, 不错, 6.00#5.50)");
    CachingChatClient cached(mock, cache);

    RunManifest m1;
    auto first = predict_stage1({test[0]}, mock_options(), cached, m1); // "interrupted" after T1
    CHECK(mock.calls() == 1);

    RunManifest m2;
    auto resumed = predict_stage1(test, mock_options(), cached, m2);
    CHECK(mock.calls() == 2); // T1 came from cache, only T2 was sent
    CHECK(resumed[0].raw_text == first[0].raw_text);

    RunManifest m3;
    auto rerun = predict_stage1(test, mock_options(), cached, m3);
    CHECK(mock.calls() == 2); // identical rerun issues zero endpoint calls
    CHECK(cached.endpoint_calls() == 2);

    // a fresh caching client over the same directory needs no endpoint either
    MockChatClient mock2;
    CachingChatClient cached2(mock2, cache);
    RunManifest m4;
    auto cold = predict_stage1(test, mock_options(), cached2, m4);
    CHECK(mock2.calls() == 0);
    CHECK(cold[1].raw_text == rerun[1].raw_text);
}

TEST_CASE("stage-1 prediction files are byte-deterministic") {
    std::vector<Sample> test = {{"T1", "牛肉面不错。", {}}, {"T2", "太贵了。", {}}};
    MockChatClient mock;
    mock.set_default("(NULL, 餐厅#概括, 不错, 6.00#5.50)");
    RunManifest m1, m2;
    auto a = predict_stage1(test, mock_options(), mock, m1);
    auto b = predict_stage1(test, mock_options(), mock, m2);

    auto pa = std::filesystem::temp_directory_path() / "preds_a.jsonl";
    auto pb = std::filesystem::temp_directory_path() / "preds_b.jsonl";
    write_predictions(pa, a, "cfg", TupleMode::quadruple);
    write_predictions(pb, b, "cfg", TupleMode::quadruple);
    CHECK(read_text_file(pa) == read_text_file(pb));
}

TEST_CASE("prediction files round-trip") {
    std::vector<Sample> test = {{"T1", "牛肉面不错。", {}}};
    MockChatClient mock;
    mock.set_default("(牛肉面, 食物#品质, 不错, 6.50#5.50)\n胡说八道");
    RunManifest manifest;
    auto preds = predict_stage1(test, mock_options(), mock, manifest);

    auto path = std::filesystem::temp_directory_path() / "round.jsonl";
    write_predictions(path, preds, "cfg-hash", TupleMode::quadruple);
    PredictionFile loaded = read_predictions(path);
    CHECK(loaded.config_hash == "cfg-hash");
    CHECK(loaded.mode == TupleMode::quadruple);
    REQUIRE(loaded.predictions.size() == 1);
    CHECK(loaded.predictions[0].sample_id == preds[0].sample_id);
    CHECK(loaded.predictions[0].raw_text == preds[0].raw_text);
    CHECK(loaded.predictions[0].tuples == preds[0].tuples);
    CHECK(loaded.predictions[0].warnings == preds[0].warnings);
}

TEST_CASE("stage 2 replays the case study") {
    MockEncoderClient encoder(24);
    std::vector<Sample> train = {
        {"A", "This salad is really my love.",
         {{"salad", *Category::from_text("食物#品质"), "my love", {7.50, 7.25}}}},
        {"B", "牛肉面很好吃。", {{"牛肉面", *Category::from_text("食物#品质"), "很好吃", {7.00, 6.00}}}},
        {"C", "服务不错。", {{"服务", *Category::from_text("服务#概括"), "不错", {6.50, 5.50}}}},
    };
    OpinionIndex index = OpinionIndex::build(train, encoder);
    auto lexicon = build_lexicon(train);
    std::vector<Sample> test = {{"X", "Homemade hummus is my love.", {}}};

    MockChatClient chat;
    // the stage-2 prompt contains the retrieved salad sentence; stage 1 does not
    chat.add_rule("This salad is really my love.", "(Homemade hummus, 食物#品质, my love, 7.00#7.00)");
    chat.add_rule("Homemade hummus is my love.", "(Homemade hummus, 食物#品质, my love, 6.50#6.00)");

    RunManifest m1;
    auto coarse = predict_stage1(test, mock_options(), chat, m1);
    REQUIRE(coarse.size() == 1);
    REQUIRE(coarse[0].tuples.size() == 1);
    CHECK(coarse[0].tuples[0].intensity == Intensity{6.50, 6.00});

    RunManifest m2;
    auto fine = predict_stage2(test, coarse, index, lexicon, 3, mock_options(), chat, encoder, m2);
    REQUIRE(fine.size() == 1);
    CHECK(fine[0].stage == Stage::fine);
    CHECK_FALSE(fine[0].used_fallback);
    REQUIRE(fine[0].tuples.size() == 1);
    CHECK(fine[0].tuples[0].intensity == Intensity{7.00, 7.00});
    CHECK(fine[0].tuples[0].opinion == "my love");

    // the re-prediction prompt really carried the retrieved example
    auto prompts = chat.prompts();
    REQUIRE(prompts.size() == 2);
    CHECK(prompts[1].find("This salad is really my love.") != std::string::npos);
    CHECK(prompts[1].find("词语参考: my love=7.50#7.25") != std::string::npos);
}

TEST_CASE("stage 2 falls back to fixed demonstrations on empty stage-1 output") {
    MockEncoderClient encoder(16);
    std::vector<Sample> train = {
        {"A", "好吃。", {{"NULL", *Category::from_text("食物#品质"), "好吃", {7.00, 6.00}}}}};
    OpinionIndex index = OpinionIndex::build(train, encoder);
    auto lexicon = build_lexicon(train);
    std::vector<Sample> test = {{"X", "没什么好说的。", {}}};

    MockChatClient chat;
    chat.set_default("(NULL, 餐厅#概括, 一般, 5.00#5.00)");
    std::vector<Prediction> coarse = {{"X", Stage::coarse, "", {}, {}, false, false}};

    RunManifest manifest;
    auto fine = predict_stage2(test, coarse, index, lexicon, 3, mock_options(), chat, encoder, manifest);
    REQUIRE(fine.size() == 1);
    CHECK(fine[0].used_fallback);
    CHECK(fine[0].stage == Stage::fine);
    REQUIRE_FALSE(fine[0].tuples.empty());
}

TEST_CASE("stage 2 requires stage-1 coverage") {
    MockEncoderClient encoder(16);
    std::vector<Sample> train = {
        {"A", "好吃。", {{"NULL", *Category::from_text("食物#品质"), "好吃", {7.00, 6.00}}}}};
    OpinionIndex index = OpinionIndex::build(train, encoder);
    std::vector<Sample> test = {{"X", "x", {}}};
    MockChatClient chat;
    chat.set_default("(NULL, 餐厅#概括, 一般, 5.00#5.00)");
    RunManifest manifest;
    CHECK_THROWS_AS(static_cast<void>(predict_stage2(test, {}, index, {}, 3, mock_options(), chat,
                                                     encoder, manifest)),
                    ValidationError);
}

TEST_CASE("stage 2 isolates encoder failures per sample") {
    class FailingEncoder : public EncoderClient {
      public:
        std::vector<Embedding> embed(const std::vector<std::string>&) override {
            throw EndpointError("encoder down");
        }
        std::string identity() const override { return "failing"; }
    };

    MockEncoderClient good(16);
    std::vector<Sample> train = {
        {"A", "好吃。", {{"NULL", *Category::from_text("食物#品质"), "好吃", {7.00, 6.00}}}}};
    OpinionIndex index = OpinionIndex::build(train, good);
    std::vector<Sample> test = {{"X", "很好吃。", {}}};
    std::vector<Prediction> coarse = {
        {"X", Stage::coarse, "", {{"NULL", Category::from_text("食物#品质"), "很好吃", {7.0, 6.0}}},
         {}, false, false}};

    MockChatClient chat;
    chat.set_default("(NULL, 食物#品质, 好吃, 7.00#6.00)");
    FailingEncoder failing;
    RunManifest manifest;
    auto fine =
        predict_stage2(test, coarse, index, build_lexicon(train), 3, mock_options(), chat, failing, manifest);
    REQUIRE(fine.size() == 1);
    CHECK(fine[0].failed);
    CHECK(manifest.sample_status.at("X") == "failed");
}

TEST_CASE("manifest round-trips through its file form") {
    RunManifest m;
    m.config_hash = "c";
    m.dataset_hash = "d";
    m.template_ids = {"prompt2"};
    m.example_set_hash = "e";
    m.endpoint_identity = "mock-chat";
    m.seed = 9;
    m.sample_status = {{"T1", "ok"}, {"T2", "failed"}};
    m.endpoint_calls = 5;
    auto path = std::filesystem::temp_directory_path() / "manifest.json";
    write_manifest(path, m);
    RunManifest back = read_manifest(path);
    CHECK(back.config_hash == m.config_hash);
    CHECK(back.dataset_hash == m.dataset_hash);
    CHECK(back.template_ids == m.template_ids);
    CHECK(back.example_set_hash == m.example_set_hash);
    CHECK(back.endpoint_identity == m.endpoint_identity);
    CHECK(back.seed == m.seed);
    CHECK(back.sample_status == m.sample_status);
    CHECK(back.endpoint_calls == m.endpoint_calls);
}

TEST_CASE("parallel prediction keeps dataset order and determinism") {
    std::vector<Sample> test;
    for (int i = 0; i < 12; ++i) test.push_back({"T" + std::to_string(i), "句子" + std::to_string(i), {}});
    MockChatClient mock;
    mock.set_default("(NULL, 餐厅#概括, 不错, 6.00#5.50)");

    InferenceOptions serial = mock_options();
    InferenceOptions parallel = mock_options();
    parallel.parallelism = 4;

    RunManifest m1, m2;
    auto a = predict_stage1(test, serial, mock, m1);
    auto b = predict_stage1(test, parallel, mock, m2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].sample_id == b[i].sample_id);
        CHECK(a[i].raw_text == b[i].raw_text);
        CHECK(a[i].tuples == b[i].tuples);
    }
}
