#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ibis/ibl.hpp"
#include "ibis/types.hpp"

namespace ibis {

enum class Metric { Human, Semantic, Cosine, WeightedCosine, PrunedCosine, Ensemble, Ibis };

const char* metric_name(Metric m);
Metric metric_from_string(const std::string& s);

// The four baselines an ensemble may combine, in canonical order.
inline constexpr std::array<Metric, 4> kEnsembleComponents = {
    Metric::Semantic, Metric::Cosine, Metric::WeightedCosine, Metric::PrunedCosine};

// Per-email similarity to each category. Human and Ibis points live on the
// 1-simplex; cosine-family components are raw values in [-1, 1] until
// to_eval_space maps them onto the unit square.
struct SimilarityPoint {
    std::string email_id;
    double sim_phishing = 0.0;
    double sim_ham = 0.0;
    Metric source_metric = Metric::Human;
    bool degenerate = false; // all-zero cs sum convention applied

    double of(Category c) const { return c == Category::Phishing ? sim_phishing : sim_ham; }
};

struct CategoryPrototype {
    Category category = Category::Phishing;
    std::vector<double> mean_embedding;
    std::array<double, SemanticFeatures::kCount> mean_semantic{};
};

struct Prototypes {
    CategoryPrototype phishing, ham;
    const CategoryPrototype& of(Category c) const {
        return c == Category::Phishing ? phishing : ham;
    }
};

// Category means over the given email subset (typically a training split).
// Both categories must be represented.
Prototypes compute_prototypes(const Dataset& dataset, std::span<const std::size_t> email_indices);

struct HumanPointOptions {
    // false: sim_c = cs_c / sum(cs). true: softmax over cs values.
    bool softmax_form = false;
};

// Collapses the judgements of one email (from one participant or from all)
// into a point on the simplex. Judgements must be normalized first so that
// confidence and speed are in [0, 1].
SimilarityPoint human_subjective_point(const std::string& email_id,
                                       std::span<const JudgementRecord> judgements_for_email,
                                       const HumanPointOptions& options = {});

struct PairwiseScore {
    double phishing = 0.0;
    double ham = 0.0;
};

// Per-category product of the two emails' normalized similarities. Inputs
// carrying the degeneracy flag have no defined pairwise value.
PairwiseScore pairwise_human_similarity(const SimilarityPoint& a, const SimilarityPoint& b);
PairwiseScore pairwise_ibis(const SimilarityPoint& a, const SimilarityPoint& b);

double cosine(std::span<const double> x, std::span<const double> y);

struct WeightVector {
    std::vector<double> w;
    void validate() const; // finite, not all zero
};

double weighted_cosine(std::span<const double> x, std::span<const double> y,
                       const WeightVector& weights);

struct PruneMask {
    std::vector<std::size_t> kept_indices; // sorted, unique, < D
};

double pruned_cosine(std::span<const double> x, std::span<const double> y,
                     const PruneMask& mask);

// Cosine of the email's boolean cue vector against each category's cue
// frequencies; an all-zero vector on either side scores 0 by convention.
SimilarityPoint semantic_point(const EmailDoc& email, const Prototypes& prototypes);
SimilarityPoint cosine_point(const Embedding& embedding, const Prototypes& prototypes);
SimilarityPoint weighted_cosine_point(const Embedding& embedding, const Prototypes& prototypes,
                                      const WeightVector& weights);
SimilarityPoint pruned_cosine_point(const Embedding& embedding, const Prototypes& prototypes,
                                    const PruneMask& mask);

// Convex combination of component points (componentwise). Weights must be
// nonnegative and sum to 1; component order must match `components`.
SimilarityPoint ensemble_point(const std::string& email_id,
                               std::span<const SimilarityPoint> components,
                               std::span<const double> weights);

// Normalized blended values of the twin's memory for this email. Runs with
// noise off: the score is a deterministic function of the memory state.
SimilarityPoint ibis_point(const std::string& email_id, const Memory& memory,
                           const Embedding& query, const IblParameters& params);

// Maps cosine-family components from [-1, 1] onto [0, 1]; other metrics pass
// through untouched. Evaluation compares all metrics on the unit square.
SimilarityPoint to_eval_space(const SimilarityPoint& point);

} // namespace ibis
