#pragma once

#include "dimabsa/corpus.hpp"
#include "dimabsa/encoder.hpp"
#include "dimabsa/prompting.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace dimabsa {

// a·b / (‖a‖‖b‖); 0 when either norm is 0. Throws ValidationError on
// dim mismatch.
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

enum class Polarity { negative, neutral, positive };

std::string_view to_string(Polarity p);

// Valence partition around the neutral point 5: negative below the band,
// neutral inside it, positive above. Total over [1.0, 9.0].
struct PolarityThresholds {
    double neutral_lo = 4.5;
    double neutral_hi = 5.5;
};

Polarity polarity_of(double valence, const PolarityThresholds& thresholds = {});

// One (training sample, gold quadruple) pair.
struct OpinionIndexEntry {
    std::string sample_id;
    std::string opinion;
    Intensity gold;
};

// Immutable opinion-embedding index over a training set. Row vectors are
// L2-normalized at build so a scan is a dot product with cosine semantics.
class OpinionIndex {
  public:
    static OpinionIndex build(const std::vector<Sample>& train, EncoderClient& encoder);

    std::size_t size() const { return entries_.size(); }
    Eigen::Index dim() const { return rows_.cols(); }
    const OpinionIndexEntry& entry(std::size_t i) const { return entries_[i]; }
    const Eigen::MatrixXd& vectors() const { return rows_; }
    const Sample* find_sample(const std::string& id) const;

  private:
    std::vector<OpinionIndexEntry> entries_;
    Eigen::MatrixXd rows_; // size() x dim, normalized
    std::map<std::string, Sample> samples_;
};

struct RetrievalCandidate {
    std::string sample_id;
    double similarity = 0.0; // in [-1, 1]
    Polarity polarity = Polarity::neutral;
    std::size_t entry_index = 0;
};

// Exhaustive scan. Candidates whose gold valence falls in `bucket`, sorted by
// similarity descending with ties broken by (sample_id, entry_index)
// ascending. When the bucket holds fewer than k entries the remainder is
// filled from outside the bucket, nearest valence first (distance to the
// bucket interval, then similarity, then id). Returns min(k, index size)
// candidates. Throws ValidationError on an empty index, k == 0, or a query
// dim mismatch.
std::vector<RetrievalCandidate> top_k(const Eigen::Ref<const Eigen::VectorXd>& query,
                                      const OpinionIndex& index, std::size_t k, Polarity bucket,
                                      const PolarityThresholds& thresholds = {});

struct Stage2Assembly {
    std::vector<IclExample> examples;
    std::vector<RetrievalCandidate> candidates; // deduped, capped, similarity order
    bool used_fallback = false;
};

// Stage-2 example selection: per predicted opinion, top_k in the bucket of
// its stage-1 valence; candidates are unioned across opinions, deduped by
// training sample id keeping the highest similarity, and capped at 5.
// Word hints are lexicon entries for opinions seen in the retrieved examples
// or the stage-1 prediction, padded to at least 3 (count desc) when the
// lexicon allows; each example carries the hints matching its own tuples and
// the first example carries the rest.
// An empty stage-1 prediction falls back to the fixed example set, flagged.
Stage2Assembly assemble_stage2_examples(const std::vector<Tuple>& stage1_pred, const OpinionIndex& index,
                                        const std::vector<OpinionLexiconEntry>& lexicon, std::size_t k,
                                        EncoderClient& encoder,
                                        const std::vector<IclExample>& fixed_fallback,
                                        const PolarityThresholds& thresholds = {});

} // namespace dimabsa
