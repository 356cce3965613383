#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ibis/ibl.hpp"
#include "ibis/types.hpp"

namespace ibis {

struct ParamRange {
    double lo = 0.0, hi = 0.0;
};

struct CohortConfig {
    std::size_t emails_per_category = 30;
    std::size_t dimension = 64;
    // distance between the two category mean vectors; both sit on a shared
    // random offset so raw cosine stays compressed, as it is for real
    // embeddings
    double category_separation = 12.0;
    double embedding_noise = 1.0;
    std::size_t participants = 20;
    ParamRange decay_range{0.3, 0.8};
    ParamRange sigma_range{0.25, 0.50}; // must stay > 0: tau defaults to sigma*sqrt(2)
    std::size_t trials_pre = 10;
    std::size_t trials_train = 40;
    std::size_t trials_post = 10;
    std::uint64_t rng_seed = 42;

    std::size_t trials_total() const { return trials_pre + trials_train + trials_post; }
    void validate() const;
};

struct AgentTruth {
    std::string participant_id;
    IblParameters params; // includes the simulation rng_seed
    std::vector<std::array<double, 2>> trial_values; // (v_phishing, v_ham) per trial
};

struct GroundTruth {
    std::vector<AgentTruth> agents;
    std::map<std::string, Category> email_categories;
};

struct Cohort {
    Dataset dataset;
    GroundTruth ground_truth;
    CohortConfig config;
};

// Gaussian category clouds around means separated by category_separation,
// with phishing cue flags ~ Bernoulli(0.5) and ham ~ Bernoulli(0.05).
// The separating direction loads every dimension equally (random signs); a
// shared random offset dominates all but a prune-mask-wide set of clean
// dimensions, so full-space cosine is offset-compressed while per-dimension
// ranking can recover the clean subspace.
// Values are rounded through float32, the embedding storage type.
void generate_embeddings(const CohortConfig& config, std::vector<EmailDoc>& emails,
                         std::vector<Embedding>& embeddings);

struct SimulatedParticipant {
    std::vector<JudgementRecord> records;
    AgentTruth truth;
};

// Runs one memory model generatively over the email sequence: choose the
// higher blended value (noise on), emit confidence as the clipped value gap
// and reaction time as a monotone function of it, store outcomes on feedback
// (train-phase) trials.
SimulatedParticipant simulate_participant(const IblParameters& agent_params,
                                          const std::string& participant_id,
                                          const std::vector<std::size_t>& email_sequence,
                                          const Dataset& emails_only,
                                          const CohortConfig& config);

Cohort generate_cohort(const CohortConfig& config);

// emails.jsonl, embeddings.bin, judgements.csv, ground_truth.json
void write_cohort(const Cohort& cohort, const std::string& dir);
GroundTruth load_ground_truth(const std::string& path);

} // namespace ibis
