#include "ibis/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ibis/errors.hpp"

namespace ibis {

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::Human: return "human";
        case Metric::Semantic: return "semantic";
        case Metric::Cosine: return "cosine";
        case Metric::WeightedCosine: return "weighted_cosine";
        case Metric::PrunedCosine: return "pruned_cosine";
        case Metric::Ensemble: return "ensemble";
        case Metric::Ibis: return "ibis";
    }
    return "unknown";
}

Metric metric_from_string(const std::string& s) {
    for (Metric m : {Metric::Human, Metric::Semantic, Metric::Cosine, Metric::WeightedCosine,
                     Metric::PrunedCosine, Metric::Ensemble, Metric::Ibis})
        if (s == metric_name(m)) return m;
    fail(ErrorKind::BadConfig, "unknown metric '" + s + "'");
}

Prototypes compute_prototypes(const Dataset& dataset,
                              std::span<const std::size_t> email_indices) {
    Prototypes protos;
    protos.phishing.category = Category::Phishing;
    protos.ham.category = Category::Ham;
    protos.phishing.mean_embedding.assign(dataset.dimension, 0.0);
    protos.ham.mean_embedding.assign(dataset.dimension, 0.0);

    std::size_t n_phishing = 0, n_ham = 0;
    for (std::size_t i : email_indices) {
        const EmailDoc& email = dataset.emails.at(i);
        const Embedding& emb = dataset.embeddings.at(i);
        CategoryPrototype& proto =
            email.category == Category::Phishing ? protos.phishing : protos.ham;
        (email.category == Category::Phishing ? n_phishing : n_ham) += 1;
        for (std::size_t j = 0; j < dataset.dimension; ++j)
            proto.mean_embedding[j] += emb.values[j];
        const auto sem = email.semantic.as_vector();
        for (std::size_t j = 0; j < sem.size(); ++j) proto.mean_semantic[j] += sem[j];
    }
    if (n_phishing == 0 || n_ham == 0)
        fail(ErrorKind::EmptyGroup, "prototype subset must contain both categories");

    for (double& v : protos.phishing.mean_embedding) v /= static_cast<double>(n_phishing);
    for (double& v : protos.ham.mean_embedding) v /= static_cast<double>(n_ham);
    for (double& v : protos.phishing.mean_semantic) v /= static_cast<double>(n_phishing);
    for (double& v : protos.ham.mean_semantic) v /= static_cast<double>(n_ham);
    return protos;
}

SimilarityPoint human_subjective_point(const std::string& email_id,
                                       std::span<const JudgementRecord> judgements_for_email,
                                       const HumanPointOptions& options) {
    if (judgements_for_email.empty())
        fail(ErrorKind::NoJudgements, "no judgements for email '" + email_id + "'");

    // cs(x|c) = p(c|x) * mean speed(c|x) * mean confidence(c|x)
    double cs[2] = {0.0, 0.0};
    const std::size_t n = judgements_for_email.size();
    for (Category c : {Category::Phishing, Category::Ham}) {
        std::size_t count = 0;
        double conf_sum = 0.0, speed_sum = 0.0;
        for (const auto& j : judgements_for_email)
            if (j.decision == c) {
                ++count;
                conf_sum += j.confidence;
                speed_sum += j.speed;
            }
        if (count > 0) {
            const double p = static_cast<double>(count) / static_cast<double>(n);
            cs[c == Category::Phishing ? 0 : 1] =
                p * (speed_sum / count) * (conf_sum / count);
        }
    }

    SimilarityPoint point;
    point.email_id = email_id;
    point.source_metric = Metric::Human;
    if (options.softmax_form) {
        const double m = std::max(cs[0], cs[1]);
        const double e0 = std::exp(cs[0] - m), e1 = std::exp(cs[1] - m);
        point.sim_phishing = e0 / (e0 + e1);
        point.sim_ham = e1 / (e0 + e1);
        return point;
    }
    const double sum = cs[0] + cs[1];
    if (sum == 0.0) {
        point.sim_phishing = 0.5;
        point.sim_ham = 0.5;
        point.degenerate = true;
        return point;
    }
    point.sim_phishing = cs[0] / sum;
    point.sim_ham = cs[1] / sum;
    return point;
}

PairwiseScore pairwise_human_similarity(const SimilarityPoint& a, const SimilarityPoint& b) {
    if (a.degenerate || b.degenerate)
        fail(ErrorKind::DegenerateDenominator,
             "pairwise similarity undefined for email '" +
                 (a.degenerate ? a.email_id : b.email_id) + "' with an all-zero cs sum");
    return PairwiseScore{a.sim_phishing * b.sim_phishing, a.sim_ham * b.sim_ham};
}

PairwiseScore pairwise_ibis(const SimilarityPoint& a, const SimilarityPoint& b) {
    if (a.degenerate || b.degenerate)
        fail(ErrorKind::DegenerateBlend, "pairwise score undefined for a degenerate point");
    return PairwiseScore{a.sim_phishing * b.sim_phishing, a.sim_ham * b.sim_ham};
}

double cosine(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        fail(ErrorKind::DimensionMismatch,
             "cosine of vectors with dimensions " + std::to_string(x.size()) + " and " +
                 std::to_string(y.size()));
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        dot += x[j] * y[j];
        nx += x[j] * x[j];
        ny += y[j] * y[j];
    }
    if (nx == 0.0 || ny == 0.0) fail(ErrorKind::ZeroVector, "cosine of an all-zero vector");
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

void WeightVector::validate() const {
    bool any = false;
    for (double v : w) {
        if (!std::isfinite(v)) fail(ErrorKind::BadConfig, "weight vector has non-finite entries");
        if (v != 0.0) any = true;
    }
    if (!any) fail(ErrorKind::BadConfig, "weight vector is all zeros");
}

double weighted_cosine(std::span<const double> x, std::span<const double> y,
                       const WeightVector& weights) {
    if (x.size() != y.size() || x.size() != weights.w.size())
        fail(ErrorKind::DimensionMismatch, "weighted cosine dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double wx = weights.w[j] * x[j];
        const double wy = weights.w[j] * y[j];
        dot += wx * wy;
        nx += wx * wx;
        ny += wy * wy;
    }
    if (nx == 0.0 || ny == 0.0)
        fail(ErrorKind::ZeroAfterWeighting, "vector is zero after applying weights");
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

double pruned_cosine(std::span<const double> x, std::span<const double> y,
                     const PruneMask& mask) {
    if (x.size() != y.size()) fail(ErrorKind::DimensionMismatch, "pruned cosine dimension mismatch");
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t j : mask.kept_indices) {
        if (j >= x.size())
            fail(ErrorKind::DimensionMismatch,
                 "mask index " + std::to_string(j) + " outside dimension " +
                     std::to_string(x.size()));
        dot += x[j] * y[j];
        nx += x[j] * x[j];
        ny += y[j] * y[j];
    }
    if (nx == 0.0 || ny == 0.0)
        fail(ErrorKind::ZeroAfterMasking, "vector is zero after masking");
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

namespace {

// zero-vector-tolerant cosine for sparse cue vectors
double semantic_cosine(std::span<const double> x, std::span<const double> y) {
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        dot += x[j] * y[j];
        nx += x[j] * x[j];
        ny += y[j] * y[j];
    }
    if (nx == 0.0 || ny == 0.0) return 0.0;
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

} // namespace

SimilarityPoint semantic_point(const EmailDoc& email, const Prototypes& prototypes) {
    const auto features = email.semantic.as_vector();
    SimilarityPoint point;
    point.email_id = email.id;
    point.source_metric = Metric::Semantic;
    point.sim_phishing = semantic_cosine(features, prototypes.phishing.mean_semantic);
    point.sim_ham = semantic_cosine(features, prototypes.ham.mean_semantic);
    return point;
}

SimilarityPoint cosine_point(const Embedding& embedding, const Prototypes& prototypes) {
    SimilarityPoint point;
    point.email_id = embedding.email_id;
    point.source_metric = Metric::Cosine;
    point.sim_phishing = cosine(embedding.values, prototypes.phishing.mean_embedding);
    point.sim_ham = cosine(embedding.values, prototypes.ham.mean_embedding);
    return point;
}

SimilarityPoint weighted_cosine_point(const Embedding& embedding, const Prototypes& prototypes,
                                      const WeightVector& weights) {
    SimilarityPoint point;
    point.email_id = embedding.email_id;
    point.source_metric = Metric::WeightedCosine;
    point.sim_phishing =
        weighted_cosine(embedding.values, prototypes.phishing.mean_embedding, weights);
    point.sim_ham = weighted_cosine(embedding.values, prototypes.ham.mean_embedding, weights);
    return point;
}

SimilarityPoint pruned_cosine_point(const Embedding& embedding, const Prototypes& prototypes,
                                    const PruneMask& mask) {
    SimilarityPoint point;
    point.email_id = embedding.email_id;
    point.source_metric = Metric::PrunedCosine;
    point.sim_phishing =
        pruned_cosine(embedding.values, prototypes.phishing.mean_embedding, mask);
    point.sim_ham = pruned_cosine(embedding.values, prototypes.ham.mean_embedding, mask);
    return point;
}

SimilarityPoint ensemble_point(const std::string& email_id,
                               std::span<const SimilarityPoint> components,
                               std::span<const double> weights) {
    if (components.size() != weights.size() || components.empty())
        fail(ErrorKind::MisalignedPoints, "component points and weights must pair up");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0))
            fail(ErrorKind::WeightNotOnSimplex, "ensemble weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        fail(ErrorKind::WeightNotOnSimplex,
             "ensemble weights sum to " + std::to_string(sum) + ", expected 1");

    SimilarityPoint point;
    point.email_id = email_id;
    point.source_metric = Metric::Ensemble;
    for (std::size_t m = 0; m < components.size(); ++m) {
        if (components[m].email_id != email_id)
            fail(ErrorKind::MisalignedPoints,
                 "component point for email '" + components[m].email_id +
                     "' mixed into ensemble for '" + email_id + "'");
        point.sim_phishing += weights[m] * components[m].sim_phishing;
        point.sim_ham += weights[m] * components[m].sim_ham;
    }
    return point;
}

SimilarityPoint ibis_point(const std::string& email_id, const Memory& memory,
                           const Embedding& query, const IblParameters& params) {
    Rng unused(0); // noise is off, no draws happen
    const double v_phishing =
        blended_value(memory, Category::Phishing, query, params, false, unused);
    const double v_ham = blended_value(memory, Category::Ham, query, params, false, unused);
    const double sum = v_phishing + v_ham;
    if (!(sum > 0.0))
        fail(ErrorKind::DegenerateBlend,
             "blended values sum to zero for email '" + email_id + "'");
    SimilarityPoint point;
    point.email_id = email_id;
    point.source_metric = Metric::Ibis;
    point.sim_phishing = v_phishing / sum;
    point.sim_ham = v_ham / sum;
    return point;
}

SimilarityPoint to_eval_space(const SimilarityPoint& point) {
    switch (point.source_metric) {
        case Metric::Cosine:
        case Metric::WeightedCosine:
        case Metric::PrunedCosine: {
            SimilarityPoint out = point;
            out.sim_phishing = (point.sim_phishing + 1.0) / 2.0;
            out.sim_ham = (point.sim_ham + 1.0) / 2.0;
            return out;
        }
        default:
            return point;
    }
}

} // namespace ibis
