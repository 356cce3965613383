#include "ibis/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibis/errors.hpp"

namespace ibis {

namespace {

constexpr double kLogFloor = -700.0; // below this exp() underflows to 0
constexpr double kBandwidthFloor = 1e-3;

void check_finite(std::span<const std::array<double, 2>> points, const char* what) {
    for (const auto& p : points)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            fail(ErrorKind::NonFiniteScore, std::string(what) + " contains non-finite points");
}

} // namespace

KdeModel kde_fit(std::span<const std::array<double, 2>> points) {
    if (points.empty()) fail(ErrorKind::EmptyPoints, "cannot fit a density to zero points");
    check_finite(points, "fit set");

    const double n = static_cast<double>(points.size());
    Bandwidth h;
    for (int d = 0; d < 2; ++d) {
        double mean = 0.0;
        for (const auto& p : points) mean += p[d];
        mean /= n;
        double var = 0.0;
        for (const auto& p : points) var += (p[d] - mean) * (p[d] - mean);
        var /= n;
        const double scott = std::pow(n, -1.0 / 6.0) * std::sqrt(var);
        (d == 0 ? h.x : h.y) = std::max(scott, kBandwidthFloor);
    }
    return kde_fit(points, h);
}

KdeModel kde_fit(std::span<const std::array<double, 2>> points, Bandwidth h) {
    if (points.empty()) fail(ErrorKind::EmptyPoints, "cannot fit a density to zero points");
    if (!(h.x > 0.0) || !(h.y > 0.0)) fail(ErrorKind::BadConfig, "bandwidths must be > 0");
    check_finite(points, "fit set");
    KdeModel model;
    model.points.assign(points.begin(), points.end());
    model.h = h;
    return model;
}

double kde_log_density(const KdeModel& model, const std::array<double, 2>& z) {
    // log( 1/(n 2 pi hx hy) * sum_i exp(-(dx_i^2 + dy_i^2)/2) ), dx/dy in
    // bandwidth units, evaluated as logsumexp
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> exponents;
    exponents.reserve(model.points.size());
    for (const auto& p : model.points) {
        const double dx = (z[0] - p[0]) / model.h.x;
        const double dy = (z[1] - p[1]) / model.h.y;
        const double e = -0.5 * (dx * dx + dy * dy);
        exponents.push_back(e);
        best = std::max(best, e);
    }
    double sum = 0.0;
    for (double e : exponents) sum += std::exp(e - best);
    const double two_pi = 2.0 * 3.14159265358979323846;
    return best + std::log(sum) - std::log(static_cast<double>(model.points.size())) -
           std::log(two_pi * model.h.x * model.h.y);
}

KdeScore kde_log_score(const KdeModel& model,
                       std::span<const std::array<double, 2>> eval_points) {
    if (eval_points.empty()) fail(ErrorKind::EmptyEval, "no points to score");
    check_finite(eval_points, "eval set");
    KdeScore score;
    for (const auto& z : eval_points) {
        double lp = kde_log_density(model, z);
        if (!std::isfinite(lp) || lp < kLogFloor) {
            lp = kLogFloor;
            score.floored_points += 1;
        }
        score.total += lp;
    }
    if (!std::isfinite(score.total)) fail(ErrorKind::NonFiniteScore, "score is not finite");
    return score;
}

namespace {

double sigmoid(double t) {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace

LogisticModel logistic_fit(std::span<const std::array<double, 2>> points,
                           std::span<const int> labels) {
    if (points.size() != labels.size() || points.empty())
        fail(ErrorKind::MisalignedPoints, "points and labels must pair up");
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1)
        fail(ErrorKind::SingleClass, "training labels contain a single class");

    LogisticModel m;
    const double n = static_cast<double>(points.size());
    constexpr double kRate = 0.1;
    constexpr int kMaxIters = 1000;
    constexpr double kGradTol = 1e-8;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        double g0 = 0.0, g1 = 0.0, gb = 0.0; // gradient of mean log-likelihood
        for (std::size_t i = 0; i < points.size(); ++i) {
            const double p = sigmoid(m.w0 * points[i][0] + m.w1 * points[i][1] + m.bias);
            const double err = static_cast<double>(labels[i]) - p;
            g0 += err * points[i][0];
            g1 += err * points[i][1];
            gb += err;
        }
        g0 /= n;
        g1 /= n;
        gb /= n;
        if (std::sqrt(g0 * g0 + g1 * g1 + gb * gb) < kGradTol) break;
        m.w0 += kRate * g0;
        m.w1 += kRate * g1;
        m.bias += kRate * gb;
    }
    return m;
}

int logistic_predict(const LogisticModel& model, const std::array<double, 2>& point) {
    return model.w0 * point[0] + model.w1 * point[1] + model.bias > 0.0 ? 1 : 0;
}

void SplitPlan::validate() const {
    if (n_splits < 1) fail(ErrorKind::BadConfig, "n_splits must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        fail(ErrorKind::BadConfig, "train_fraction must be in (0, 1)");
}

MeanSd summarize(std::span<const double> values) {
    MeanSd out;
    out.n = values.size();
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(var / static_cast<double>(values.size()));
    return out;
}

std::vector<std::size_t> stratified_split(std::span<const int> labels, double train_fraction,
                                          Rng& rng) {
    std::vector<std::size_t> train;
    for (int label : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) members.push_back(i);
        if (members.size() < 2)
            fail(ErrorKind::TooFewPerCategory,
                 "label " + std::to_string(label) + " has " + std::to_string(members.size()) +
                     " points; need at least 2");
        for (std::size_t i = members.size() - 1; i > 0; --i)
            std::swap(members[i], members[rng.below(i + 1)]);
        auto take = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(members.size())));
        take = std::clamp<std::size_t>(take, 1, members.size() - 1);
        train.insert(train.end(), members.begin(),
                     members.begin() + static_cast<std::ptrdiff_t>(take));
    }
    std::sort(train.begin(), train.end());
    return train;
}

MeanSd regression_accuracy(std::span<const std::array<double, 2>> points,
                           std::span<const int> labels, const SplitPlan& plan) {
    plan.validate();
    if (points.size() != labels.size())
        fail(ErrorKind::MisalignedPoints, "points and labels must pair up");

    std::vector<double> accuracies;
    accuracies.reserve(static_cast<std::size_t>(plan.n_splits));
    for (int s = 0; s < plan.n_splits; ++s) {
        Rng rng(derive_seed(plan.rng_seed, static_cast<std::uint64_t>(s)));
        const auto train_idx = stratified_split(labels, plan.train_fraction, rng);

        std::vector<std::array<double, 2>> train_points;
        std::vector<int> train_labels;
        std::vector<char> in_train(points.size(), 0);
        for (std::size_t i : train_idx) {
            in_train[i] = 1;
            train_points.push_back(points[i]);
            train_labels.push_back(labels[i]);
        }
        const LogisticModel model = logistic_fit(train_points, train_labels);

        std::size_t hits = 0, total = 0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (in_train[i]) continue;
            ++total;
            if (logistic_predict(model, points[i]) == labels[i]) ++hits;
        }
        accuracies.push_back(static_cast<double>(hits) / static_cast<double>(total));
    }
    return summarize(accuracies);
}

double prediction_accuracy(const TwinTrace& trace) {
    if (trace.trials.empty()) fail(ErrorKind::EmptyTrace, "trace has no trials");
    std::size_t hits = 0;
    for (const auto& t : trace.trials)
        if (t.matched) ++hits;
    return static_cast<double>(hits) / static_cast<double>(trace.trials.size());
}

double next_decision_accuracy(std::span<const std::array<double, 2>> features,
                              std::span<const int> labels) {
    if (features.size() != labels.size() || features.empty())
        fail(ErrorKind::EmptyTrace, "features and labels must pair up and be nonempty");

    std::size_t hits = 0;
    for (std::size_t t = 0; t < features.size(); ++t) {
        int predicted;
        std::size_t ones = 0;
        for (std::size_t i = 0; i < t; ++i) ones += static_cast<std::size_t>(labels[i]);
        if (t == 0) {
            predicted = 1; // no history: call everything suspicious
        } else if (ones == 0 || ones == t) {
            predicted = ones == 0 ? 0 : 1; // one-sided history: majority rule
        } else {
            const LogisticModel model =
                logistic_fit(features.subspan(0, t), labels.subspan(0, t));
            predicted = logistic_predict(model, features[t]);
        }
        if (predicted == labels[t]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(features.size());
}

} // namespace ibis
