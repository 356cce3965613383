#include "ibis/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ibis/errors.hpp"

namespace ibis {

using nlohmann::json;

void FitConfig::validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorKind::BadConfig, "learning_rate must be > 0");
    if (epochs < 1) fail(ErrorKind::BadConfig, "epochs must be >= 1");
    if (!(convergence_tol >= 0.0)) fail(ErrorKind::BadConfig, "convergence_tol must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        fail(ErrorKind::BadConfig, "train_fraction must be in (0, 1)");
}

WeightFitBatch build_weight_batch(const Dataset& dataset,
                                  std::span<const std::size_t> email_indices,
                                  const Prototypes& prototypes,
                                  const std::map<std::string, SimilarityPoint>& human_points) {
    std::size_t n_phishing = 0, n_ham = 0;
    for (std::size_t i : email_indices)
        (dataset.emails.at(i).category == Category::Phishing ? n_phishing : n_ham) += 1;
    if (n_phishing < 2 || n_ham < 2)
        fail(ErrorKind::InsufficientData,
             "need at least 2 training emails per category, got " + std::to_string(n_phishing) +
                 " phishing and " + std::to_string(n_ham) + " ham");

    WeightFitBatch batch;
    batch.dim = dataset.dimension;
    for (std::size_t i : email_indices) {
        const auto& email = dataset.emails[i];
        auto it = human_points.find(email.id);
        if (it == human_points.end())
            fail(ErrorKind::InsufficientData,
                 "no human point for training email '" + email.id + "'");
        for (Category c : {Category::Phishing, Category::Ham}) {
            batch.emails.emplace_back(dataset.embeddings[i].values);
            batch.prototypes.emplace_back(prototypes.of(c).mean_embedding);
            batch.targets.push_back(it->second.of(c));
        }
    }
    return batch;
}

namespace {

struct RowTerms {
    double s = 0.0, a = 0.0, b = 0.0; // S = sum w^2 x p, A = sum (wx)^2, B = sum (wp)^2
    double cs() const { return s / std::sqrt(a * b); }
};

RowTerms row_terms(const WeightVector& w, std::span<const double> x, std::span<const double> p) {
    RowTerms t;
    for (std::size_t j = 0; j < w.w.size(); ++j) {
        const double wx = w.w[j] * x[j];
        const double wp = w.w[j] * p[j];
        t.s += wx * wp;
        t.a += wx * wx;
        t.b += wp * wp;
    }
    return t;
}

} // namespace

double weighted_cosine_loss(const WeightVector& weights, const WeightFitBatch& batch) {
    if (batch.size() == 0) fail(ErrorKind::InsufficientData, "empty fitting batch");
    double loss = 0.0;
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const RowTerms t = row_terms(weights, batch.emails[r], batch.prototypes[r]);
        if (t.a == 0.0 || t.b == 0.0)
            fail(ErrorKind::ZeroAfterWeighting, "vector is zero after applying weights");
        const double g = (t.cs() + 1.0) / 2.0;
        const double d = g - batch.targets[r];
        loss += d * d;
    }
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) fail(ErrorKind::NonFiniteLoss, "loss is not finite");
    return loss;
}

std::vector<double> analytic_weight_gradient(const WeightVector& weights,
                                             const WeightFitBatch& batch) {
    if (batch.size() == 0) fail(ErrorKind::InsufficientData, "empty fitting batch");
    const std::size_t dim = weights.w.size();
    std::vector<double> grad(dim, 0.0);
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const auto x = batch.emails[r];
        const auto p = batch.prototypes[r];
        const RowTerms t = row_terms(weights, x, p);
        if (t.a == 0.0 || t.b == 0.0)
            fail(ErrorKind::ZeroAfterWeighting, "vector is zero after applying weights");
        const double cs = t.cs();
        const double g = (cs + 1.0) / 2.0;
        // dL_r/dw_j = (g - y) * dCS/dw_j, the 1/2 of the rescale cancelling
        // the 2 of the squared error
        const double outer = g - batch.targets[r];
        const double inv_sab = 1.0 / std::sqrt(t.a * t.b);
        for (std::size_t j = 0; j < dim; ++j) {
            const double dcs = 2.0 * weights.w[j] * x[j] * p[j] * inv_sab -
                               cs * (weights.w[j] * x[j] * x[j] / t.a +
                                     weights.w[j] * p[j] * p[j] / t.b);
            grad[j] += outer * dcs;
        }
    }
    for (double& g : grad) {
        g /= static_cast<double>(batch.size());
        if (!std::isfinite(g)) fail(ErrorKind::NonFiniteGradient, "gradient is not finite");
    }
    return grad;
}

namespace {

// Shared descent loop: `loss` evaluates a candidate, `gradient` the current
// point, `clamp` maps a raw step onto the feasible set (identity for the
// unconstrained fit, simplex projection for the ensemble).
template <typename Vec, typename LossFn, typename GradFn, typename ClampFn>
FitReport descend(Vec& point, const FitConfig& config, LossFn&& loss, GradFn&& gradient,
                  ClampFn&& clamp) {
    config.validate();
    FitReport report;
    double current = loss(point);
    report.initial_loss = current;
    report.loss_trajectory.push_back(current);

    double step = config.learning_rate;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto grad = gradient(point);
        bool accepted = false;
        // the step size only ever shrinks; 60 halvings put it below any
        // meaningful resolution
        for (int attempt = 0; attempt < 60; ++attempt) {
            Vec candidate = point;
            for (std::size_t j = 0; j < candidate.size(); ++j)
                candidate[j] -= step * grad[j];
            candidate = clamp(std::move(candidate));
            const double cand_loss = loss(candidate);
            if (cand_loss <= current) {
                point = std::move(candidate);
                const double delta = current - cand_loss;
                current = cand_loss;
                report.loss_trajectory.push_back(current);
                report.iterations_run = epoch + 1;
                accepted = true;
                if (delta < config.convergence_tol) report.converged = true;
                break;
            }
            step /= 2.0;
        }
        if (!accepted) {
            report.converged = true;
            break;
        }
        if (report.converged) break;
    }
    report.final_loss = current;
    return report;
}

} // namespace

WeightFitResult fit_weighted_cosine(const WeightFitBatch& batch, const FitConfig& config) {
    WeightFitResult result;
    result.weights.w.assign(batch.dim, 1.0);
    result.report = descend(
        result.weights.w, config,
        [&](const std::vector<double>& w) {
            return weighted_cosine_loss(WeightVector{w}, batch);
        },
        [&](const std::vector<double>& w) {
            return analytic_weight_gradient(WeightVector{w}, batch);
        },
        [](std::vector<double> w) { return w; });
    return result;
}

DimensionRanking rank_dimensions(const Dataset& dataset,
                                 std::span<const std::size_t> email_indices) {
    if (email_indices.empty()) fail(ErrorKind::InsufficientData, "no emails to rank on");
    std::size_t n_phishing = 0;
    for (std::size_t i : email_indices)
        if (dataset.emails.at(i).category == Category::Phishing) ++n_phishing;
    if (n_phishing == 0 || n_phishing == email_indices.size())
        fail(ErrorKind::InsufficientData, "ranking needs both categories present");

    const std::size_t dim = dataset.dimension;
    const double n = static_cast<double>(email_indices.size());
    const double label_mean = static_cast<double>(n_phishing) / n;
    const double label_var = label_mean * (1.0 - label_mean); // population variance of 0/1

    DimensionRanking ranking;
    ranking.correlation.assign(dim, 0.0);
    ranking.constant_flags.assign(dim, false);
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (std::size_t i : email_indices) mean += dataset.embeddings[i].values[j];
        mean /= n;
        double var = 0.0, cov = 0.0;
        for (std::size_t i : email_indices) {
            const double dx = dataset.embeddings[i].values[j] - mean;
            const double dy =
                (dataset.emails[i].category == Category::Phishing ? 1.0 : 0.0) - label_mean;
            var += dx * dx;
            cov += dx * dy;
        }
        var /= n;
        cov /= n;
        if (var <= 0.0) {
            ranking.constant_flags[j] = true;
            ranking.correlation[j] = 0.0;
        } else {
            ranking.correlation[j] = std::abs(cov / std::sqrt(var * label_var));
        }
    }

    ranking.order.resize(dim);
    std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
    std::stable_sort(ranking.order.begin(), ranking.order.end(),
                     [&](std::size_t a, std::size_t b) {
                         if (ranking.constant_flags[a] != ranking.constant_flags[b])
                             return !ranking.constant_flags[a];
                         if (ranking.correlation[a] != ranking.correlation[b])
                             return ranking.correlation[a] > ranking.correlation[b];
                         return a < b;
                     });
    return ranking;
}

PruneMask build_prune_mask(const DimensionRanking& ranking, std::size_t k) {
    if (k == 0 || k > ranking.order.size())
        fail(ErrorKind::KTooLarge, "k = " + std::to_string(k) + " outside [1, " +
                                       std::to_string(ranking.order.size()) + "]");
    PruneMask mask;
    mask.kept_indices.assign(ranking.order.begin(),
                             ranking.order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(mask.kept_indices.begin(), mask.kept_indices.end());
    return mask;
}

std::size_t default_prune_k(std::size_t dim) {
    if (dim == 3072) return 500;
    const std::size_t k =
        static_cast<std::size_t>(std::llround(500.0 / 3072.0 * static_cast<double>(dim)));
    return std::clamp<std::size_t>(k, 1, dim);
}

EnsembleFitBatch build_ensemble_batch(
    const std::vector<std::map<std::string, SimilarityPoint>>& component_points,
    std::span<const Metric> components,
    const std::map<std::string, SimilarityPoint>& human_points) {
    if (component_points.size() != components.size() || components.size() < 2)
        fail(ErrorKind::MisalignedPoints, "need at least 2 aligned component point sets");

    EnsembleFitBatch batch;
    batch.components.assign(components.begin(), components.end());
    for (const auto& [email_id, human] : human_points) {
        std::vector<double> row_phishing, row_ham;
        for (const auto& points : component_points) {
            auto it = points.find(email_id);
            if (it == points.end())
                fail(ErrorKind::MisalignedPoints,
                     "component points missing email '" + email_id + "'");
            row_phishing.push_back(it->second.sim_phishing);
            row_ham.push_back(it->second.sim_ham);
        }
        batch.features.push_back(std::move(row_phishing));
        batch.targets.push_back(human.sim_phishing);
        batch.features.push_back(std::move(row_ham));
        batch.targets.push_back(human.sim_ham);
    }
    return batch;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
    // sort-based Euclidean projection onto {w >= 0, sum w = 1}
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumulative += u[j];
        const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (u[j] - candidate > 0.0) {
            rho = j + 1;
            theta = candidate;
        }
    }
    (void)rho;
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

EnsembleFitResult fit_ensemble(const EnsembleFitBatch& batch, const FitConfig& config) {
    const std::size_t m = batch.components.size();
    if (m < 2) fail(ErrorKind::MisalignedPoints, "ensemble needs at least 2 components");
    if (batch.targets.empty()) fail(ErrorKind::InsufficientData, "empty ensemble batch");
    for (const auto& row : batch.features)
        if (row.size() != m)
            fail(ErrorKind::MisalignedPoints, "feature row width does not match components");

    auto loss = [&](const std::vector<double>& w) {
        double total = 0.0;
        for (std::size_t r = 0; r < batch.targets.size(); ++r) {
            double pred = 0.0;
            for (std::size_t j = 0; j < m; ++j) pred += w[j] * batch.features[r][j];
            const double d = pred - batch.targets[r];
            total += d * d;
        }
        total /= static_cast<double>(batch.targets.size());
        if (!std::isfinite(total)) fail(ErrorKind::NonFiniteLoss, "loss is not finite");
        return total;
    };
    auto gradient = [&](const std::vector<double>& w) {
        std::vector<double> grad(m, 0.0);
        for (std::size_t r = 0; r < batch.targets.size(); ++r) {
            double pred = 0.0;
            for (std::size_t j = 0; j < m; ++j) pred += w[j] * batch.features[r][j];
            const double outer = 2.0 * (pred - batch.targets[r]);
            for (std::size_t j = 0; j < m; ++j) grad[j] += outer * batch.features[r][j];
        }
        for (double& g : grad) {
            g /= static_cast<double>(batch.targets.size());
            if (!std::isfinite(g)) fail(ErrorKind::NonFiniteGradient, "gradient is not finite");
        }
        return grad;
    };

    EnsembleFitResult result;
    result.components = batch.components;
    result.weights.assign(m, 1.0 / static_cast<double>(m));
    result.report = descend(result.weights, config, loss, gradient,
                            [](std::vector<double> w) { return project_to_simplex(std::move(w)); });
    return result;
}

// ------------------------------------------------------------- artifacts ---

namespace {

json prototypes_to_json(const Prototypes& protos) {
    auto one = [](const CategoryPrototype& p) {
        return json{{"category", to_string(p.category)},
                    {"mean_embedding", p.mean_embedding},
                    {"mean_semantic", p.mean_semantic}};
    };
    return json{{"phishing", one(protos.phishing)}, {"ham", one(protos.ham)}};
}

Prototypes prototypes_from_json(const json& j) {
    auto one = [](const json& p, Category expected) {
        CategoryPrototype proto;
        proto.category = category_from_string(p.at("category").get<std::string>());
        if (proto.category != expected)
            fail(ErrorKind::MalformedRecord, "prototype category out of place");
        proto.mean_embedding = p.at("mean_embedding").get<std::vector<double>>();
        auto sem = p.at("mean_semantic").get<std::vector<double>>();
        if (sem.size() != SemanticFeatures::kCount)
            fail(ErrorKind::MalformedRecord, "prototype semantic vector has wrong size");
        std::copy(sem.begin(), sem.end(), proto.mean_semantic.begin());
        return proto;
    };
    Prototypes protos;
    protos.phishing = one(j.at("phishing"), Category::Phishing);
    protos.ham = one(j.at("ham"), Category::Ham);
    return protos;
}

json report_to_json(const FitReport& report) {
    return json{{"initial_loss", report.initial_loss},
                {"final_loss", report.final_loss},
                {"loss_trajectory", report.loss_trajectory},
                {"iterations_run", report.iterations_run},
                {"converged", report.converged}};
}

FitReport report_from_json(const json& j) {
    FitReport report;
    report.initial_loss = j.at("initial_loss").get<double>();
    report.final_loss = j.at("final_loss").get<double>();
    report.loss_trajectory = j.at("loss_trajectory").get<std::vector<double>>();
    report.iterations_run = j.at("iterations_run").get<int>();
    report.converged = j.at("converged").get<bool>();
    return report;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedRecord, path + ": invalid JSON: " + e.what());
    }
}

void save_json_file(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::IoFailure, "short write to " + path);
}

} // namespace

void save_weight_artifact(const WeightArtifact& artifact, const std::string& path) {
    save_json_file(json{{"kind", "weighted_cosine"},
                        {"weights", artifact.weights.w},
                        {"prototypes", prototypes_to_json(artifact.prototypes)},
                        {"report", report_to_json(artifact.report)},
                        {"train_email_ids", artifact.train_email_ids}},
                   path);
}

WeightArtifact load_weight_artifact(const std::string& path) {
    const json j = load_json_file(path);
    if (j.value("kind", "") != "weighted_cosine")
        fail(ErrorKind::MalformedRecord, path + ": not a weighted_cosine artifact");
    WeightArtifact artifact;
    artifact.weights.w = j.at("weights").get<std::vector<double>>();
    artifact.weights.validate();
    artifact.prototypes = prototypes_from_json(j.at("prototypes"));
    artifact.report = report_from_json(j.at("report"));
    artifact.train_email_ids = j.at("train_email_ids").get<std::vector<std::string>>();
    return artifact;
}

void save_prune_artifact(const PruneArtifact& artifact, const std::string& path) {
    save_json_file(json{{"kind", "pruned_cosine"},
                        {"kept_indices", artifact.mask.kept_indices},
                        {"k", artifact.k},
                        {"prototypes", prototypes_to_json(artifact.prototypes)},
                        {"correlation", artifact.correlation},
                        {"constant_dims", artifact.constant_dims},
                        {"train_email_ids", artifact.train_email_ids}},
                   path);
}

PruneArtifact load_prune_artifact(const std::string& path) {
    const json j = load_json_file(path);
    if (j.value("kind", "") != "pruned_cosine")
        fail(ErrorKind::MalformedRecord, path + ": not a pruned_cosine artifact");
    PruneArtifact artifact;
    artifact.mask.kept_indices = j.at("kept_indices").get<std::vector<std::size_t>>();
    artifact.k = j.at("k").get<std::size_t>();
    artifact.prototypes = prototypes_from_json(j.at("prototypes"));
    artifact.correlation = j.at("correlation").get<std::vector<double>>();
    artifact.constant_dims = j.at("constant_dims").get<std::vector<std::size_t>>();
    artifact.train_email_ids = j.at("train_email_ids").get<std::vector<std::string>>();
    return artifact;
}

void save_ensemble_artifact(const EnsembleArtifact& artifact, const std::string& path) {
    json weights;
    for (std::size_t j = 0; j < artifact.components.size(); ++j)
        weights[metric_name(artifact.components[j])] = artifact.weights[j];
    save_json_file(json{{"kind", "ensemble"},
                        {"weights", weights},
                        {"report", report_to_json(artifact.report)},
                        {"train_email_ids", artifact.train_email_ids}},
                   path);
}

EnsembleArtifact load_ensemble_artifact(const std::string& path) {
    const json j = load_json_file(path);
    if (j.value("kind", "") != "ensemble")
        fail(ErrorKind::MalformedRecord, path + ": not an ensemble artifact");
    EnsembleArtifact artifact;
    const json& weights = j.at("weights");
    for (Metric m : kEnsembleComponents) {
        if (!weights.contains(metric_name(m)))
            fail(ErrorKind::MalformedRecord,
                 path + ": missing ensemble weight for " + metric_name(m));
        artifact.components.push_back(m);
        artifact.weights.push_back(weights.at(metric_name(m)).get<double>());
    }
    artifact.report = report_from_json(j.at("report"));
    artifact.train_email_ids = j.at("train_email_ids").get<std::vector<std::string>>();
    return artifact;
}

} // namespace ibis
