#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "ibis/dataset_io.hpp"
#include "ibis/errors.hpp"
#include "ibis/fitting.hpp"
#include "ibis/rng.hpp"

using namespace ibis;
namespace fs = std::filesystem;

namespace {

// Owns the vectors the batch spans point into.
struct BatchStorage {
    std::vector<std::vector<double>> emails, prototypes;
    WeightFitBatch batch;
};

BatchStorage random_batch(Rng& rng, std::size_t rows, std::size_t dim) {
    BatchStorage s;
    s.batch.dim = dim;
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> e(dim), p(dim);
        for (double& v : e) v = rng.uniform(-1.0, 1.0);
        for (double& v : p) v = rng.uniform(-1.0, 1.0);
        s.emails.push_back(std::move(e));
        s.prototypes.push_back(std::move(p));
        s.batch.targets.push_back(rng.uniform());
    }
    for (std::size_t r = 0; r < rows; ++r) {
        s.batch.emails.emplace_back(s.emails[r]);
        s.batch.prototypes.emplace_back(s.prototypes[r]);
    }
    return s;
}

// Targets consistent with a known weighting: (cos_w + 1) / 2.
void retarget(BatchStorage& s, const WeightVector& w) {
    for (std::size_t r = 0; r < s.batch.size(); ++r)
        s.batch.targets[r] = (weighted_cosine(s.emails[r], s.prototypes[r], w) + 1.0) / 2.0;
}

std::string temp_dir() {
    static int counter = 0;
    const std::string dir =
        (fs::temp_directory_path() / ("ibis_fit_" + std::to_string(counter++))).string();
    fs::create_directories(dir);
    return dir;
}

Dataset labeled_dataset(std::size_t per_category, std::size_t dim, Rng& rng,
                        double indicator_gap) {
    std::vector<EmailDoc> emails;
    std::vector<Embedding> embeddings;
    for (std::size_t i = 0; i < 2 * per_category; ++i) {
        EmailDoc e;
        e.id = "m" + std::to_string(i);
        e.category = i < per_category ? Category::Phishing : Category::Ham;
        Embedding v;
        v.email_id = e.id;
        v.values.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) v.values[j] = rng.uniform(-1.0, 1.0);
        // dimension 0 separates the labels by indicator_gap; dimension dim-1
        // is constant everywhere
        v.values[0] = (e.category == Category::Phishing ? indicator_gap : 0.0) +
                      0.01 * rng.uniform();
        v.values[dim - 1] = 0.25;
        emails.push_back(std::move(e));
        embeddings.push_back(std::move(v));
    }
    return assemble_dataset(emails, embeddings, {});
}

} // namespace

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(2024);
    const double h = 1e-6;
    for (int fixture = 0; fixture < 20; ++fixture) {
        BatchStorage s = random_batch(rng, 12, 8);
        WeightVector w;
        w.w.resize(8);
        for (double& v : w.w) v = rng.uniform(0.5, 1.5);

        const auto grad = analytic_weight_gradient(w, s.batch);
        for (std::size_t j = 0; j < 8; ++j) {
            WeightVector lo = w, hi = w;
            lo.w[j] -= h;
            hi.w[j] += h;
            const double numeric =
                (weighted_cosine_loss(hi, s.batch) - weighted_cosine_loss(lo, s.batch)) /
                (2.0 * h);
            const double denom = std::max({std::abs(numeric), std::abs(grad[j]), 1e-8});
            CHECK(std::abs(grad[j] - numeric) / denom < 1e-4);
        }
    }
}

TEST_CASE("weighted-cosine loss is scale invariant in the weights") {
    Rng rng(5);
    BatchStorage s = random_batch(rng, 10, 6);
    WeightVector w;
    w.w = {1.0, 0.5, 2.0, 0.25, 1.5, 0.75};
    WeightVector scaled;
    for (double v : w.w) scaled.w.push_back(3.0 * v);
    CHECK(std::abs(weighted_cosine_loss(w, s.batch) - weighted_cosine_loss(scaled, s.batch)) <
          1e-12);
}

TEST_CASE("fitting on unweighted-cosine targets converges immediately from all-ones") {
    Rng rng(31);
    BatchStorage s = random_batch(rng, 30, 8);
    WeightVector ones;
    ones.w.assign(8, 1.0);
    retarget(s, ones);

    FitConfig config;
    const auto result = fit_weighted_cosine(s.batch, config);
    CHECK(result.report.final_loss < 1e-6);
    CHECK(result.report.converged);
    for (std::size_t i = 1; i < result.report.loss_trajectory.size(); ++i)
        CHECK(result.report.loss_trajectory[i] <= result.report.loss_trajectory[i - 1]);
}

TEST_CASE("fitting recovers most of the loss against skewed-weight targets") {
    Rng rng(77);
    BatchStorage s = random_batch(rng, 60, 8);
    WeightVector skew;
    skew.w = {2.0, 0.3, 1.0, 1.7, 0.5, 1.2, 0.8, 1.4};
    retarget(s, skew);

    FitConfig config;
    config.learning_rate = 0.05;
    config.epochs = 3000;
    config.convergence_tol = 1e-14;
    const auto result = fit_weighted_cosine(s.batch, config);
    CHECK(result.report.initial_loss > 1e-4);
    CHECK(result.report.final_loss < 0.1 * result.report.initial_loss);
    for (std::size_t i = 1; i < result.report.loss_trajectory.size(); ++i)
        CHECK(result.report.loss_trajectory[i] <= result.report.loss_trajectory[i - 1]);
    CHECK(result.report.loss_trajectory.front() == result.report.initial_loss);
    CHECK(result.report.loss_trajectory.back() == result.report.final_loss);
}

TEST_CASE("dimension ranking puts the label indicator first and constants last") {
    Rng rng(11);
    const Dataset d = labeled_dataset(10, 6, rng, 2.0);
    std::vector<std::size_t> all(d.emails.size());
    std::iota(all.begin(), all.end(), 0);

    const auto ranking = rank_dimensions(d, all);
    CHECK(ranking.order.size() == 6);
    CHECK(ranking.order.front() == 0);
    CHECK(ranking.order.back() == 5); // the constant dimension sinks
    CHECK(ranking.constant_flags[5]);
    CHECK_FALSE(ranking.constant_flags[0]);
    CHECK(ranking.correlation[0] > 0.9);

    const PruneMask top2 = build_prune_mask(ranking, 2);
    CHECK(top2.kept_indices.size() == 2);
    CHECK(std::is_sorted(top2.kept_indices.begin(), top2.kept_indices.end()));
    CHECK(std::find(top2.kept_indices.begin(), top2.kept_indices.end(), 0) !=
          top2.kept_indices.end());

    CHECK_THROWS_AS(build_prune_mask(ranking, 0), Error);
    CHECK_THROWS_AS(build_prune_mask(ranking, 7), Error);

    std::vector<std::size_t> one_sided = {0, 1, 2};
    CHECK_THROWS_AS(rank_dimensions(d, one_sided), Error);
}

TEST_CASE("default prune size scales the 500-of-3072 reference ratio") {
    CHECK(default_prune_k(3072) == 500);
    CHECK(default_prune_k(64) == 10);
    CHECK(default_prune_k(2) == 1);  // rounds to zero, clamped up
    CHECK(default_prune_k(1) == 1);
    CHECK(default_prune_k(6144) == 1000);
}

TEST_CASE("pruning is the 0/1 special case of weighting") {
    Rng rng(13);
    PruneMask mask;
    mask.kept_indices = {0, 2, 3, 7};
    WeightVector w;
    w.w.assign(8, 0.0);
    for (std::size_t j : mask.kept_indices) w.w[j] = 1.0;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(8), y(8);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        for (double& v : y) v = rng.uniform(-1.0, 1.0);
        CHECK(pruned_cosine(x, y, mask) == weighted_cosine(x, y, w));
    }
}

TEST_CASE("simplex projection clamps, renormalizes and preserves order") {
    const auto id = project_to_simplex({0.5, 0.25, 0.25});
    CHECK(std::abs(id[0] - 0.5) < 1e-12);
    CHECK(std::abs(id[1] - 0.25) < 1e-12);

    const auto vertex = project_to_simplex({2.0, 0.0});
    CHECK(vertex[0] == 1.0);
    CHECK(vertex[1] == 0.0);

    const auto mixed = project_to_simplex({0.4, 0.1, -0.2});
    double sum = 0.0;
    for (double v : mixed) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK(mixed[0] > mixed[1]);
    CHECK(mixed[1] > mixed[2]);
}

TEST_CASE("ensemble fit recovers a pure component") {
    Rng rng(404);
    EnsembleFitBatch batch;
    batch.components = {Metric::Semantic, Metric::Cosine, Metric::WeightedCosine,
                        Metric::PrunedCosine};
    for (int r = 0; r < 80; ++r) {
        std::vector<double> row(4);
        for (double& v : row) v = rng.uniform();
        batch.targets.push_back(row[2]); // the weighted-cosine column
        batch.features.push_back(std::move(row));
    }
    FitConfig config;
    config.learning_rate = 0.5;
    config.epochs = 4000;
    config.convergence_tol = 1e-14;
    const auto result = fit_ensemble(batch, config);
    REQUIRE(result.weights.size() == 4);
    CHECK(result.weights[2] >= 0.95);
    CHECK(result.report.final_loss < 1e-4);
    double sum = 0.0;
    for (double w : result.weights) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    for (std::size_t i = 1; i < result.report.loss_trajectory.size(); ++i)
        CHECK(result.report.loss_trajectory[i] <= result.report.loss_trajectory[i - 1]);
}

TEST_CASE("fit artifacts round-trip through json") {
    const std::string dir = temp_dir();
    Rng rng(8);

    WeightArtifact wa;
    wa.weights.w = {1.5, 0.25, 2.0};
    wa.prototypes.phishing.category = Category::Phishing;
    wa.prototypes.phishing.mean_embedding = {0.1, 0.2, 0.3};
    wa.prototypes.phishing.mean_semantic = {0.5, 0, 0, 0.25, 0, 1};
    wa.prototypes.ham.category = Category::Ham;
    wa.prototypes.ham.mean_embedding = {-0.1, 0.0, 0.4};
    wa.report.initial_loss = 0.2;
    wa.report.final_loss = 0.01;
    wa.report.loss_trajectory = {0.2, 0.05, 0.01};
    wa.report.iterations_run = 2;
    wa.report.converged = true;
    wa.train_email_ids = {"a", "b"};
    save_weight_artifact(wa, dir + "/w.json");
    const auto wl = load_weight_artifact(dir + "/w.json");
    CHECK(wl.weights.w == wa.weights.w);
    CHECK(wl.prototypes.phishing.mean_embedding == wa.prototypes.phishing.mean_embedding);
    CHECK(wl.prototypes.ham.mean_embedding == wa.prototypes.ham.mean_embedding);
    CHECK(wl.prototypes.phishing.mean_semantic == wa.prototypes.phishing.mean_semantic);
    CHECK(wl.report.final_loss == wa.report.final_loss);
    CHECK(wl.report.loss_trajectory == wa.report.loss_trajectory);
    CHECK(wl.train_email_ids == wa.train_email_ids);

    PruneArtifact pa;
    pa.mask.kept_indices = {0, 2};
    pa.k = 2;
    pa.prototypes = wa.prototypes;
    pa.correlation = {0.9, 0.1, 0.5};
    pa.constant_dims = {1};
    pa.train_email_ids = {"a", "b"};
    save_prune_artifact(pa, dir + "/p.json");
    const auto pl = load_prune_artifact(dir + "/p.json");
    CHECK(pl.mask.kept_indices == pa.mask.kept_indices);
    CHECK(pl.k == 2);
    CHECK(pl.correlation == pa.correlation);
    CHECK(pl.constant_dims == pa.constant_dims);

    EnsembleArtifact ea;
    ea.components = {Metric::Semantic, Metric::Cosine, Metric::WeightedCosine,
                     Metric::PrunedCosine};
    ea.weights = {0.1, 0.2, 0.3, 0.4};
    ea.report.final_loss = 0.02;
    ea.train_email_ids = {"a"};
    save_ensemble_artifact(ea, dir + "/e.json");
    const auto el = load_ensemble_artifact(dir + "/e.json");
    CHECK(el.components == ea.components);
    CHECK(el.weights == ea.weights);
    CHECK(el.report.final_loss == ea.report.final_loss);

    CHECK_THROWS_AS(load_weight_artifact(dir + "/missing.json"), Error);
    // kind mismatch: a prune artifact is not a weight artifact
    CHECK_THROWS_AS(load_weight_artifact(dir + "/p.json"), Error);
}

TEST_CASE("weight batch construction validates its inputs") {
    Rng rng(3);
    Dataset d = labeled_dataset(3, 4, rng, 1.0);
    std::vector<std::size_t> all(d.emails.size());
    std::iota(all.begin(), all.end(), 0);
    const Prototypes protos = compute_prototypes(d, all);

    std::map<std::string, SimilarityPoint> humans;
    for (const auto& e : d.emails) {
        SimilarityPoint pt;
        pt.email_id = e.id;
        pt.sim_phishing = e.category == Category::Phishing ? 0.8 : 0.2;
        pt.sim_ham = e.category == Category::Phishing ? 0.2 : 0.8;
        humans.emplace(e.id, pt);
    }

    const auto batch = build_weight_batch(d, all, protos, humans);
    CHECK(batch.dim == 4);
    CHECK(batch.size() == 2 * d.emails.size()); // one row per category
    CHECK(batch.targets[0] == 0.8);
    CHECK(batch.targets[1] == 0.2);

    std::vector<std::size_t> too_few = {0, 3};
    CHECK_THROWS_AS(build_weight_batch(d, too_few, protos, humans), Error);

    humans.erase(d.emails[1].id);
    CHECK_THROWS_AS(build_weight_batch(d, all, protos, humans), Error);
}

TEST_CASE("fit configuration is validated") {
    FitConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = FitConfig{};
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = FitConfig{};
    bad.train_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}
