#include "dimabsa/retrieval.hpp"

#include "dimabsa/util.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace dimabsa {

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() != b.size())
        throw ValidationError("cosine dim mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

std::string_view to_string(Polarity p) {
    switch (p) {
    case Polarity::negative: return "negative";
    case Polarity::neutral: return "neutral";
    case Polarity::positive: return "positive";
    }
    return "neutral";
}

Polarity polarity_of(double valence, const PolarityThresholds& t) {
    if (valence < t.neutral_lo) return Polarity::negative;
    if (valence > t.neutral_hi) return Polarity::positive;
    return Polarity::neutral;
}

OpinionIndex OpinionIndex::build(const std::vector<Sample>& train, EncoderClient& encoder) {
    OpinionIndex index;
    std::vector<std::string> opinions;
    for (const Sample& s : train) {
        for (const Quadruple& q : s.gold) {
            index.entries_.push_back({s.id, std::string(trim(q.opinion)), q.intensity});
            opinions.push_back(index.entries_.back().opinion);
        }
        index.samples_.emplace(s.id, s);
    }
    if (index.entries_.empty()) return index;

    std::vector<Embedding> vectors = embed_batch(opinions, encoder);
    index.rows_.resize(static_cast<Eigen::Index>(vectors.size()), vectors.front().size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        double norm = vectors[i].norm();
        if (norm == 0.0)
            index.rows_.row(static_cast<Eigen::Index>(i)).setZero();
        else
            index.rows_.row(static_cast<Eigen::Index>(i)) = (vectors[i] / norm).transpose();
    }
    return index;
}

const Sample* OpinionIndex::find_sample(const std::string& id) const {
    auto it = samples_.find(id);
    return it == samples_.end() ? nullptr : &it->second;
}

namespace {

// Distance from a valence to the closed hull of a bucket's interval.
double valence_distance(double v, Polarity bucket, const PolarityThresholds& t) {
    double lo = 1.0, hi = 9.0;
    switch (bucket) {
    case Polarity::negative: hi = t.neutral_lo; break;
    case Polarity::neutral: lo = t.neutral_lo; hi = t.neutral_hi; break;
    case Polarity::positive: lo = t.neutral_hi; break;
    }
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
}

} // namespace

std::vector<RetrievalCandidate> top_k(const Eigen::Ref<const Eigen::VectorXd>& query,
                                      const OpinionIndex& index, std::size_t k, Polarity bucket,
                                      const PolarityThresholds& thresholds) {
    if (index.size() == 0) throw ValidationError("top_k on an empty index");
    if (k == 0) throw ValidationError("top_k requires k >= 1");
    if (query.size() != index.dim())
        throw ValidationError("query dim " + std::to_string(query.size()) + " does not match index dim " +
                              std::to_string(index.dim()));

    double qnorm = query.norm();
    Eigen::VectorXd sims;
    if (qnorm == 0.0)
        sims = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(index.size()));
    else
        sims = index.vectors() * (query / qnorm);

    std::vector<std::size_t> in_bucket, out_bucket;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (polarity_of(index.entry(i).gold.valence, thresholds) == bucket)
            in_bucket.push_back(i);
        else
            out_bucket.push_back(i);
    }

    auto by_similarity = [&](std::size_t a, std::size_t b) {
        double sa = sims[static_cast<Eigen::Index>(a)];
        double sb = sims[static_cast<Eigen::Index>(b)];
        if (sa != sb) return sa > sb;
        const auto& ea = index.entry(a);
        const auto& eb = index.entry(b);
        if (ea.sample_id != eb.sample_id) return ea.sample_id < eb.sample_id;
        return a < b;
    };
    std::sort(in_bucket.begin(), in_bucket.end(), by_similarity);

    std::size_t want = std::min(k, index.size());
    std::vector<std::size_t> chosen(in_bucket.begin(),
                                    in_bucket.begin() + static_cast<std::ptrdiff_t>(
                                                            std::min(want, in_bucket.size())));
    if (chosen.size() < want) {
        auto by_valence_then_similarity = [&](std::size_t a, std::size_t b) {
            double da = valence_distance(index.entry(a).gold.valence, bucket, thresholds);
            double db = valence_distance(index.entry(b).gold.valence, bucket, thresholds);
            if (da != db) return da < db;
            return by_similarity(a, b);
        };
        std::sort(out_bucket.begin(), out_bucket.end(), by_valence_then_similarity);
        for (std::size_t i : out_bucket) {
            if (chosen.size() == want) break;
            chosen.push_back(i);
        }
    }

    std::vector<RetrievalCandidate> result;
    result.reserve(chosen.size());
    for (std::size_t i : chosen) {
        const auto& e = index.entry(i);
        result.push_back({e.sample_id, sims[static_cast<Eigen::Index>(i)],
                          polarity_of(e.gold.valence, thresholds), i});
    }
    return result;
}

namespace {

constexpr std::size_t kMaxStage2Examples = 5;
constexpr std::size_t kMinWordHints = 3;

std::vector<OpinionLexiconEntry> collect_hints(const std::vector<IclExample>& examples,
                                               const std::vector<Tuple>& stage1_pred,
                                               const std::vector<OpinionLexiconEntry>& lexicon) {
    std::unordered_map<std::string_view, const OpinionLexiconEntry*> by_opinion;
    for (const OpinionLexiconEntry& e : lexicon) by_opinion.emplace(e.opinion, &e);

    std::set<std::string> wanted;
    for (const IclExample& ex : examples)
        for (const Tuple& t : ex.tuples) wanted.insert(std::string(trim(t.opinion)));
    for (const Tuple& t : stage1_pred) wanted.insert(std::string(trim(t.opinion)));

    std::vector<OpinionLexiconEntry> hints;
    for (const std::string& opinion : wanted) {
        auto it = by_opinion.find(opinion);
        if (it != by_opinion.end()) hints.push_back(*it->second);
    }
    if (hints.size() < kMinWordHints) {
        std::vector<const OpinionLexiconEntry*> pool;
        for (const OpinionLexiconEntry& e : lexicon)
            if (!wanted.count(e.opinion)) pool.push_back(&e);
        std::sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) {
            if (a->count != b->count) return a->count > b->count;
            return a->opinion < b->opinion;
        });
        for (const auto* e : pool) {
            if (hints.size() >= kMinWordHints) break;
            hints.push_back(*e);
        }
    }
    return hints;
}

} // namespace

Stage2Assembly assemble_stage2_examples(const std::vector<Tuple>& stage1_pred, const OpinionIndex& index,
                                        const std::vector<OpinionLexiconEntry>& lexicon, std::size_t k,
                                        EncoderClient& encoder,
                                        const std::vector<IclExample>& fixed_fallback,
                                        const PolarityThresholds& thresholds) {
    if (stage1_pred.empty()) return {fixed_fallback, {}, true};
    if (index.size() == 0) throw ValidationError("stage-2 assembly requires a non-empty index");

    std::vector<std::string> opinions;
    opinions.reserve(stage1_pred.size());
    for (const Tuple& t : stage1_pred) opinions.push_back(std::string(trim(t.opinion)));
    std::vector<Embedding> queries = embed_batch(opinions, encoder);

    // Union across opinions, keeping each training sample's best similarity.
    std::unordered_map<std::string, RetrievalCandidate> best;
    for (std::size_t i = 0; i < stage1_pred.size(); ++i) {
        Polarity bucket = polarity_of(stage1_pred[i].intensity.valence, thresholds);
        for (RetrievalCandidate& c : top_k(queries[i], index, k, bucket, thresholds)) {
            auto [it, inserted] = best.emplace(c.sample_id, c);
            if (!inserted && c.similarity > it->second.similarity) it->second = c;
        }
    }

    std::vector<RetrievalCandidate> merged;
    merged.reserve(best.size());
    for (auto& [_, c] : best) merged.push_back(c);
    std::sort(merged.begin(), merged.end(), [](const RetrievalCandidate& a, const RetrievalCandidate& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.sample_id < b.sample_id;
    });
    if (merged.size() > kMaxStage2Examples) merged.resize(kMaxStage2Examples);

    Stage2Assembly out;
    out.candidates = merged;
    for (const RetrievalCandidate& c : merged) {
        const Sample* s = index.find_sample(c.sample_id);
        if (!s) throw ValidationError("index entry references unknown sample: " + c.sample_id);
        out.examples.push_back(icl_from_sample(*s));
    }

    std::vector<OpinionLexiconEntry> hints = collect_hints(out.examples, stage1_pred, lexicon);
    std::vector<bool> placed(hints.size(), false);
    for (IclExample& ex : out.examples) {
        std::unordered_set<std::string> own;
        for (const Tuple& t : ex.tuples) own.insert(std::string(trim(t.opinion)));
        for (std::size_t h = 0; h < hints.size(); ++h)
            if (!placed[h] && own.count(hints[h].opinion)) {
                ex.word_hints.push_back(hints[h]);
                placed[h] = true;
            }
    }
    if (!out.examples.empty())
        for (std::size_t h = 0; h < hints.size(); ++h)
            if (!placed[h]) out.examples.front().word_hints.push_back(hints[h]);
    return out;
}

} // namespace dimabsa
