#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ibis/metrics.hpp"
#include "ibis/types.hpp"

namespace ibis {

struct FitConfig {
    double learning_rate = 0.01;
    int epochs = 500;
    double convergence_tol = 1e-8; // on the loss delta between epochs
    std::uint64_t rng_seed = 0;
    double train_fraction = 0.5;

    void validate() const;
};

struct FitReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_trajectory; // non-increasing, starts at initial_loss
    int iterations_run = 0;
    bool converged = false;
};

// One row per (email, category): the email embedding, the category prototype
// it is compared against, and the human similarity target in [0, 1]. Spans
// point into caller-owned storage.
struct WeightFitBatch {
    std::size_t dim = 0;
    std::vector<std::span<const double>> emails;
    std::vector<std::span<const double>> prototypes;
    std::vector<double> targets;

    std::size_t size() const { return targets.size(); }
};

// Two rows per training email (one per category). Requires >= 2 training
// emails per category and a human point for every email.
WeightFitBatch build_weight_batch(const Dataset& dataset,
                                  std::span<const std::size_t> email_indices,
                                  const Prototypes& prototypes,
                                  const std::map<std::string, SimilarityPoint>& human_points);

// Mean squared error between (CS_w + 1)/2 and the targets.
double weighted_cosine_loss(const WeightVector& weights, const WeightFitBatch& batch);

// Closed-form dL/dw, quotient rule on CS_w. Matches central finite
// differences; the directional derivative along w itself is 0 because CS_w
// is scale-invariant in w.
std::vector<double> analytic_weight_gradient(const WeightVector& weights,
                                             const WeightFitBatch& batch);

struct WeightFitResult {
    WeightVector weights;
    FitReport report;
};

// Gradient descent from all-ones with step-halving: a step that would
// increase the loss is retried at half the step size, so the trajectory is
// non-increasing and the returned weights are the best seen.
WeightFitResult fit_weighted_cosine(const WeightFitBatch& batch, const FitConfig& config);

struct DimensionRanking {
    std::vector<std::size_t> order;       // all dims, most predictive first
    std::vector<double> correlation;      // |point-biserial| per dim index
    std::vector<bool> constant_flags;     // true: correlation undefined, ranked last
};

// Ranks dimensions by how strongly the embedding value separates the two
// category labels (absolute point-biserial correlation, ties by lower
// index). Constant dimensions are flagged and sink to the end.
DimensionRanking rank_dimensions(const Dataset& dataset,
                                 std::span<const std::size_t> email_indices);

PruneMask build_prune_mask(const DimensionRanking& ranking, std::size_t k);

// 500 of 3072 in the reference setup; the same fraction elsewhere.
std::size_t default_prune_k(std::size_t dim);

// Rows of component scores (column order fixed by `components`) against
// human targets, two rows per email.
struct EnsembleFitBatch {
    std::vector<Metric> components;
    std::vector<std::vector<double>> features; // features[row][component]
    std::vector<double> targets;
};

EnsembleFitBatch build_ensemble_batch(
    const std::vector<std::map<std::string, SimilarityPoint>>& component_points,
    std::span<const Metric> components,
    const std::map<std::string, SimilarityPoint>& human_points);

// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::vector<double> v);

struct EnsembleFitResult {
    std::vector<Metric> components;
    std::vector<double> weights; // on the simplex
    FitReport report;
};

// Projected gradient descent from the uniform weighting, step-halving on
// the projected candidate, best-seen tracking.
EnsembleFitResult fit_ensemble(const EnsembleFitBatch& batch, const FitConfig& config);

// ---------------------------------------------------------------------------
// Fitted artifacts on disk (JSON). Each stores everything needed to score
// unseen emails later: the fitted object plus the prototypes of its own
// training split.

struct WeightArtifact {
    WeightVector weights;
    Prototypes prototypes;
    FitReport report;
    std::vector<std::string> train_email_ids;
};

struct PruneArtifact {
    PruneMask mask;
    std::size_t k = 0;
    Prototypes prototypes;
    std::vector<double> correlation;
    std::vector<std::size_t> constant_dims;
    std::vector<std::string> train_email_ids;
};

struct EnsembleArtifact {
    std::vector<Metric> components;
    std::vector<double> weights;
    FitReport report;
    std::vector<std::string> train_email_ids;
};

void save_weight_artifact(const WeightArtifact& artifact, const std::string& path);
WeightArtifact load_weight_artifact(const std::string& path);
void save_prune_artifact(const PruneArtifact& artifact, const std::string& path);
PruneArtifact load_prune_artifact(const std::string& path);
void save_ensemble_artifact(const EnsembleArtifact& artifact, const std::string& path);
EnsembleArtifact load_ensemble_artifact(const std::string& path);

} // namespace ibis
