#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ibis/ibl.hpp"
#include "ibis/rng.hpp"

namespace ibis {

struct Bandwidth {
    double x = 0.0, y = 0.0;
};

// Gaussian product-kernel density over 2D points.
struct KdeModel {
    std::vector<std::array<double, 2>> points;
    Bandwidth h;
};

// Scott's rule per dimension: h_j = n^(-1/6) * sigma_j, floored at 1e-3 so a
// degenerate point cloud still defines a density.
KdeModel kde_fit(std::span<const std::array<double, 2>> points);
KdeModel kde_fit(std::span<const std::array<double, 2>> points, Bandwidth h);

double kde_log_density(const KdeModel& model, const std::array<double, 2>& z);

struct KdeScore {
    double total = 0.0;
    std::size_t floored_points = 0; // log densities clipped at the -700 floor
};

// Sum of log densities of the eval points under the model. Direction is
// fixed by the caller: fit the candidate metric's points, evaluate the
// human points. Higher is better.
KdeScore kde_log_score(const KdeModel& model, std::span<const std::array<double, 2>> eval_points);

struct LogisticModel {
    double w0 = 0.0, w1 = 0.0, bias = 0.0;
};

// Maximizes mean log-likelihood by gradient ascent: learning rate 0.1, up to
// 1000 iterations, stopping early when the gradient norm drops below 1e-8.
LogisticModel logistic_fit(std::span<const std::array<double, 2>> points,
                           std::span<const int> labels);
int logistic_predict(const LogisticModel& model, const std::array<double, 2>& point);

struct SplitPlan {
    int n_splits = 100;
    double train_fraction = 0.5;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // population sd: zero when n = 1
    std::size_t n = 0;
};

MeanSd summarize(std::span<const double> values);

// Stratified sample of train indices: per label, a seeded shuffle takes
// round(fraction * n) entries, clamped so both sides keep at least one.
std::vector<std::size_t> stratified_split(std::span<const int> labels, double train_fraction,
                                          Rng& rng);

// Repeated stratified holdout: per split, fit a logistic classifier on the
// train half and score the test half. Needs >= 2 points per label.
MeanSd regression_accuracy(std::span<const std::array<double, 2>> points,
                           std::span<const int> labels, const SplitPlan& plan);

// Fraction of replayed trials where the twin predicted the participant's
// actual decision.
double prediction_accuracy(const TwinTrace& trace);

// Trial-by-trial forecast from a metric's points: each trial is predicted
// from a classifier fit on the trials before it (majority/default rules
// while the history is empty or one-sided), mirroring what the twin does
// natively. Labels are 1 for phishing decisions.
double next_decision_accuracy(std::span<const std::array<double, 2>> features,
                              std::span<const int> labels);

} // namespace ibis
