#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ibis/rng.hpp"
#include "ibis/types.hpp"

namespace ibis {

enum class NoiseMode {
    MeanZero,       // sigma * N(0, 1)
    LiteralMinusOne // sigma * N(-1, 1), a published-description variant
};

enum class AttributeMode {
    CompositeCosine, // one attribute: S = (1 + cosine) / 2
    PerDimension     // D attributes: S_j = 1 - |x_j - y_j| on rescaled coords
};

struct IblParameters {
    double decay = 0.5;            // d: occurrence age exponent
    double mismatch_penalty = 1.0; // mu
    double attribute_weight = 1.0; // omega
    double noise_scale = 0.25;     // sigma
    // softmax temperature; defaults to sigma * sqrt(2) when unset. Set it
    // explicitly for a zero-noise model, the default would collapse to 0.
    std::optional<double> temperature;
    double default_utility = 0.5; // utility of prepopulated instances
    std::uint64_t rng_seed = 0;   // stream for activation noise and tie breaks
    NoiseMode noise_mode = NoiseMode::MeanZero;
    AttributeMode attribute_mode = AttributeMode::CompositeCosine;

    double tau() const { return temperature ? *temperature : noise_scale * std::sqrt(2.0); }
    void validate() const;
};

// One remembered situation: what was seen, what was chosen, how it worked
// out, and every clock tick at which this exact experience happened.
struct Instance {
    Embedding embedding;
    Category option = Category::Phishing;
    double utility = 0.0;
    std::vector<long long> occurrences; // strictly increasing, all < memory clock
};

// Per-dimension coordinate ranges for AttributeMode::PerDimension.
struct SimilarityContext {
    std::vector<double> dim_min, dim_max;
    bool empty() const { return dim_min.empty(); }
};

struct Memory {
    std::vector<Instance> instances; // storage order = insertion order
    long long clock = 1;             // prepopulated experience sits at tick 0
    SimilarityContext context;

    std::vector<std::size_t> option_instances(Category option) const;

    // Stores an experience at the given tick. An instance with identical
    // embedding values, option and utility is merged: the tick is appended
    // to its occurrence list instead of creating a duplicate.
    void store(const Embedding& embedding, Category option, double utility, long long tick);
};

// Similarity of two embeddings as a single composite attribute in [0, 1].
double attribute_similarity(const Embedding& x, const Embedding& y);

// Activation of one instance at the memory's current clock: log power-law
// recency/frequency over its occurrences, plus the weighted partial-matching
// penalty against the query, plus optional transient noise.
double activation(const Memory& memory, std::size_t instance_index, const Embedding& query,
                  const IblParameters& params, bool noise_on, Rng& rng);

// Softmax over activations / tau, restricted to the option's instances (in
// storage order, which is also the noise draw order).
std::vector<double> retrieval_probabilities(const Memory& memory, Category option,
                                            const Embedding& query, const IblParameters& params,
                                            bool noise_on, Rng& rng);

// Expected utility of choosing the option: retrieval-probability-weighted
// mean of instance utilities.
double blended_value(const Memory& memory, Category option, const Embedding& query,
                     const IblParameters& params, bool noise_on, Rng& rng);

// Centroid of all dataset embeddings; the neutral prior experience.
Embedding mean_embedding(const Dataset& dataset);

// Fresh memory holding one neutral instance per option at tick 0, utility
// default_utility, clock at 1. Per-dimension mode also needs the dataset's
// coordinate ranges in `context`.
Memory prepopulated_memory(const Embedding& neutral, const IblParameters& params,
                           SimilarityContext context = {});

SimilarityContext dimension_ranges(const Dataset& dataset);

struct TwinOptions {
    bool noise_on = true;
    bool store_without_feedback = false; // default: only feedback trials are stored
};

struct TwinTrialRecord {
    long long trial_index = 0;
    std::string email_id;
    double v_phishing = 0.0;
    double v_ham = 0.0;
    Category predicted = Category::Phishing;
    Category actual = Category::Phishing; // the participant's decision
    double utility = 0.0;                 // 1 if the participant was right, else 0
    bool stored = false;
    bool matched = false; // predicted == actual
};

struct TwinTrace {
    std::string participant_id;
    std::vector<TwinTrialRecord> trials;
};

struct TwinResult {
    TwinTrace trace;
    Memory memory; // final state, ready to score any email
};

// Replays one participant's trial sequence through a fresh model: each trial
// the model predicts from blended values, then the participant's actual
// decision and its outcome are stored (on feedback trials), and the clock
// advances. Judgements must be sorted by strictly increasing trial_index.
TwinResult twin_replay(const std::vector<JudgementRecord>& judgements, const Dataset& dataset,
                       const IblParameters& params, const TwinOptions& options = {});

} // namespace ibis
