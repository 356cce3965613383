#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ibis/evaluation.hpp"
#include "ibis/fitting.hpp"
#include "ibis/metrics.hpp"
#include "ibis/types.hpp"

namespace ibis {

// Fitted inputs the harness may need; eval fails with an actionable message
// when a selected metric's artifact is missing.
struct Artifacts {
    std::optional<WeightArtifact> weighted;
    std::optional<PruneArtifact> pruned;
    std::optional<EnsembleArtifact> ensemble;
};

struct EvalConfig {
    std::vector<Metric> metrics = {Metric::Semantic,      Metric::Cosine,
                                   Metric::WeightedCosine, Metric::PrunedCosine,
                                   Metric::Ensemble,       Metric::Ibis};
    std::uint64_t seed = 42;
    SplitPlan split_plan;       // rng_seed is derived from `seed` per use
    IblParameters ibl;          // twin parameters; rng_seed derived per participant
    FitConfig fit;              // train_fraction/seed of the prototype split
    HumanPointOptions human_options;
    TwinOptions twin_options;
    // false: fit the candidate metric's points, evaluate the human points.
    // true: the reverse, exposed for sensitivity checks.
    bool kde_fit_on_human = false;
    std::size_t min_judgements = 10;
    unsigned jobs = 0; // worker threads over participants; 0 = hardware
};

struct EvalRow {
    Metric metric = Metric::Human;
    double kde_average = 0.0; // summed log density of human points
    std::size_t kde_average_floored = 0;
    MeanSd kde_individual; // over evaluated participants
    MeanSd regression;     // over split_plan.n_splits category-label splits
    MeanSd prediction;     // over evaluated participants
    double coverage_mean = 0.0; // mean individual fit-point count
};

struct ParticipantDetail {
    std::string participant_id;
    std::size_t n_judgements = 0;
    std::size_t observed_unique = 0;
    bool evaluated = false; // false: fewer than min_judgements judgements
    std::map<Metric, double> kde_scores;
    std::map<Metric, std::size_t> fit_counts;
    std::map<Metric, double> prediction;
};

struct Report {
    std::vector<EvalRow> rows;
    std::vector<ParticipantDetail> participants;
    std::size_t n_emails = 0;
    std::size_t n_participants = 0;
    std::size_t participants_evaluated = 0;
    std::uint64_t seed = 0;
    bool kde_fit_on_human = false;
    bool human_softmax_form = false;
};

// Average-level point sets in evaluation space, one entry per dataset email
// (human: per email with at least one judgement; Ibis: mean over evaluated
// participants' twins).
struct ComputedPoints {
    std::map<Metric, std::vector<SimilarityPoint>> average;
};

struct EvalOutput {
    Report report;
    ComputedPoints points;
};

EvalOutput run_evaluation(const Dataset& dataset, const Artifacts& artifacts,
                          const EvalConfig& config);

// The two headline scores as standalone calls (used by tests and spot
// checks; run_evaluation computes the same numbers in bulk).
KdeScore evaluate_metric_average(Metric metric, const Dataset& dataset,
                                 const Artifacts& artifacts, const EvalConfig& config);
KdeScore evaluate_metric_individual(Metric metric, const Dataset& dataset,
                                    const Artifacts& artifacts, const EvalConfig& config,
                                    const std::string& participant_id);

// One participant's full point sets (their own human points plus every
// selected metric, Ibis covering all dataset emails) and the twin replay
// behind them.
struct IndividualPoints {
    std::map<Metric, std::vector<SimilarityPoint>> points;
    TwinResult twin;
    std::vector<std::string> observed_emails; // unique, in first-appearance order
};

IndividualPoints compute_individual_points(const Dataset& dataset, const Artifacts& artifacts,
                                           const EvalConfig& config,
                                           const std::string& participant_id);

void write_report_json(const Report& report, const std::string& path);
void write_report_csv(const Report& report, const std::string& path);
Report load_report_json(const std::string& path);
std::string render_report_table(const Report& report);

// Long-format scatter export: email_id,metric,sim_phishing,sim_ham.
void write_points_csv(const std::vector<std::vector<SimilarityPoint>>& point_sets,
                      const std::string& path);

} // namespace ibis
