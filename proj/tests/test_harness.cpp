#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ibis/dataset_io.hpp"
#include "ibis/errors.hpp"
#include "ibis/fitting.hpp"
#include "ibis/harness.hpp"
#include "ibis/metrics.hpp"
#include "ibis/rng.hpp"
#include "ibis/synth.hpp"

using namespace ibis;

namespace {

// Small cohort for the cheap structural checks. Big enough that every
// participant clears the default min_judgements and the training split
// keeps both categories.
CohortConfig small_config() {
    CohortConfig c;
    c.emails_per_category = 10;
    c.dimension = 16;
    c.participants = 4;
    c.trials_pre = 2;
    c.trials_train = 8;
    c.trials_post = 2;
    c.rng_seed = 7;
    return c;
}

std::map<std::string, SimilarityPoint> human_targets(const Dataset& dataset,
                                                     const HumanPointOptions& options) {
    const auto normalized = normalize_judgements(dataset.judgements, Grouping::Global).records;
    std::map<std::string, std::vector<JudgementRecord>> by_email;
    for (const auto& j : normalized) by_email[j.email_id].push_back(j);
    std::map<std::string, SimilarityPoint> out;
    for (const auto& [email_id, recs] : by_email)
        out.emplace(email_id, human_subjective_point(email_id, recs, options));
    return out;
}

// Mirrors the fit subcommand: one stratified prototype split per seed, then
// weighted, pruned and ensemble artifacts over the judged training emails.
Artifacts fit_artifacts(const Dataset& dataset, std::uint64_t seed, double weighted_lr,
                        int weighted_epochs, double ensemble_lr, int ensemble_epochs,
                        std::size_t k, bool softmax_form) {
    std::vector<int> labels;
    for (const auto& e : dataset.emails)
        labels.push_back(e.category == Category::Phishing ? 1 : 0);
    Rng rng(derive_seed(seed, "prototype_split"));
    const auto train_idx = stratified_split(labels, 0.5, rng);
    const Prototypes protos = compute_prototypes(dataset, train_idx);
    const auto human_points = human_targets(dataset, HumanPointOptions{softmax_form});

    std::vector<std::size_t> judged_train;
    for (std::size_t i : train_idx)
        if (human_points.count(dataset.emails[i].id)) judged_train.push_back(i);
    std::vector<std::string> train_ids;
    for (std::size_t i : judged_train) train_ids.push_back(dataset.emails[i].id);

    FitConfig wcfg;
    wcfg.learning_rate = weighted_lr;
    wcfg.epochs = weighted_epochs;
    wcfg.rng_seed = seed;
    const auto batch = build_weight_batch(dataset, judged_train, protos, human_points);
    const auto wres = fit_weighted_cosine(batch, wcfg);

    const auto ranking = rank_dimensions(dataset, judged_train);
    if (k == 0) k = default_prune_k(dataset.dimension);
    const PruneMask mask = build_prune_mask(ranking, k);
    std::vector<std::size_t> constant_dims;
    for (std::size_t d = 0; d < ranking.constant_flags.size(); ++d)
        if (ranking.constant_flags[d]) constant_dims.push_back(d);

    std::map<std::string, SimilarityPoint> train_targets;
    std::vector<std::map<std::string, SimilarityPoint>> component_points(
        kEnsembleComponents.size());
    for (std::size_t i : judged_train) {
        const EmailDoc& email = dataset.emails[i];
        const Embedding& emb = dataset.embeddings[i];
        train_targets.emplace(email.id, human_points.at(email.id));
        component_points[0].emplace(email.id, to_eval_space(semantic_point(email, protos)));
        component_points[1].emplace(email.id, to_eval_space(cosine_point(emb, protos)));
        component_points[2].emplace(
            email.id, to_eval_space(weighted_cosine_point(emb, protos, wres.weights)));
        component_points[3].emplace(email.id,
                                    to_eval_space(pruned_cosine_point(emb, protos, mask)));
    }
    FitConfig ecfg;
    ecfg.learning_rate = ensemble_lr;
    ecfg.epochs = ensemble_epochs;
    ecfg.rng_seed = seed;
    const auto ebatch = build_ensemble_batch(component_points, kEnsembleComponents,
                                             train_targets);
    const auto eres = fit_ensemble(ebatch, ecfg);

    Artifacts out;
    out.weighted = WeightArtifact{wres.weights, protos, wres.report, train_ids};
    out.pruned = PruneArtifact{mask, k, protos, ranking.correlation, constant_dims, train_ids};
    out.ensemble = EnsembleArtifact{eres.components, eres.weights, eres.report, train_ids};
    return out;
}

const EvalRow& row_of(const Report& report, Metric m) {
    for (const auto& r : report.rows)
        if (r.metric == m) return r;
    FAIL("metric row missing: " << metric_name(m));
    return report.rows.front();
}

std::vector<Metric> with_human() {
    return {Metric::Human,          Metric::Semantic, Metric::Cosine, Metric::WeightedCosine,
            Metric::PrunedCosine,   Metric::Ensemble, Metric::Ibis};
}

std::size_t observed_unique_of(const Dataset& dataset, const std::string& pid) {
    std::set<std::string> seen;
    for (const auto& j : dataset.judgements_of(pid)) seen.insert(j.email_id);
    return seen.size();
}

} // namespace

TEST_CASE("evaluation report covers every requested metric with sane invariants") {
    const Cohort cohort = generate_cohort(small_config());
    const Dataset& dataset = cohort.dataset;
    const Artifacts artifacts = fit_artifacts(dataset, 42, 0.05, 200, 0.05, 200, 0, false);

    EvalConfig config;
    config.metrics = with_human();
    config.seed = 42;
    config.split_plan.n_splits = 10;
    config.jobs = 1;
    const EvalOutput output = run_evaluation(dataset, artifacts, config);
    const Report& report = output.report;

    REQUIRE(report.rows.size() == config.metrics.size());
    for (std::size_t i = 0; i < config.metrics.size(); ++i)
        CHECK(report.rows[i].metric == config.metrics[i]);
    CHECK(report.n_emails == dataset.emails.size());
    CHECK(report.n_participants == 4);
    CHECK(report.participants_evaluated == 4);
    CHECK(report.seed == 42);
    CHECK_FALSE(report.kde_fit_on_human);
    CHECK_FALSE(report.human_softmax_form);

    SUBCASE("per-participant human self-fit dominates the individual column") {
        // the pooled average column carries no such guarantee: a tight
        // candidate cloud at the human center can outscore the diffuse
        // human self-fit there
        const EvalRow& human = row_of(report, Metric::Human);
        for (const auto& r : report.rows)
            CHECK(human.kde_individual.mean >= r.kde_individual.mean);
    }

    SUBCASE("twin points cover the corpus, baselines only the observed emails") {
        const std::size_t n = dataset.emails.size();
        CHECK(row_of(report, Metric::Ibis).coverage_mean == doctest::Approx(double(n)));
        for (const auto& d : report.participants) {
            REQUIRE(d.evaluated);
            const std::size_t observed = observed_unique_of(dataset, d.participant_id);
            CHECK(d.observed_unique == observed);
            CHECK(d.fit_counts.at(Metric::Ibis) == n);
            CHECK(d.fit_counts.at(Metric::Human) == observed);
            for (Metric m : {Metric::Semantic, Metric::Cosine, Metric::WeightedCosine,
                             Metric::PrunedCosine, Metric::Ensemble})
                CHECK(d.fit_counts.at(m) == observed);
            CHECK(d.n_judgements == 12);
        }
    }

    SUBCASE("accuracy columns are probabilities") {
        for (const auto& r : report.rows) {
            CHECK(r.regression.mean >= 0.0);
            CHECK(r.regression.mean <= 1.0);
            CHECK(r.prediction.mean >= 0.0);
            CHECK(r.prediction.mean <= 1.0);
            CHECK(r.kde_individual.n == 4);
        }
    }

    SUBCASE("average point clouds live on the unit square") {
        for (const auto& [metric, points] : output.points.average) {
            if (metric == Metric::Ibis || metric == Metric::Human) continue;
            CHECK(points.size() == dataset.emails.size());
        }
        for (const auto& [metric, points] : output.points.average)
            for (const auto& p : points) {
                CHECK(p.sim_phishing >= 0.0);
                CHECK(p.sim_phishing <= 1.0);
                CHECK(p.sim_ham >= 0.0);
                CHECK(p.sim_ham <= 1.0);
            }
    }

    SUBCASE("worker count does not change the numbers") {
        EvalConfig two = config;
        two.jobs = 2;
        const EvalOutput other = run_evaluation(dataset, artifacts, two);
        REQUIRE(other.report.rows.size() == report.rows.size());
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            CHECK(other.report.rows[i].kde_average == report.rows[i].kde_average);
            CHECK(other.report.rows[i].kde_individual.mean == report.rows[i].kde_individual.mean);
            CHECK(other.report.rows[i].regression.mean == report.rows[i].regression.mean);
            CHECK(other.report.rows[i].prediction.mean == report.rows[i].prediction.mean);
        }
        for (std::size_t p = 0; p < report.participants.size(); ++p)
            CHECK(other.report.participants[p].kde_scores == report.participants[p].kde_scores);
    }

    SUBCASE("standalone scorers agree with the bulk run") {
        const KdeScore avg = evaluate_metric_average(Metric::Cosine, dataset, artifacts, config);
        CHECK(avg.total == row_of(report, Metric::Cosine).kde_average);
        const std::string pid = report.participants.front().participant_id;
        const KdeScore ind =
            evaluate_metric_individual(Metric::Cosine, dataset, artifacts, config, pid);
        CHECK(ind.total == report.participants.front().kde_scores.at(Metric::Cosine));
    }
}

TEST_CASE("kde direction flag swaps which cloud is fitted") {
    const Cohort cohort = generate_cohort(small_config());
    const Artifacts artifacts = fit_artifacts(cohort.dataset, 42, 0.05, 200, 0.05, 200, 0, false);

    EvalConfig config;
    config.metrics = {Metric::Cosine};
    config.split_plan.n_splits = 5;
    config.jobs = 1;
    const EvalOutput forward = run_evaluation(cohort.dataset, artifacts, config);
    config.kde_fit_on_human = true;
    const EvalOutput reverse = run_evaluation(cohort.dataset, artifacts, config);

    CHECK(reverse.report.kde_fit_on_human);
    CHECK(forward.report.rows[0].kde_average != reverse.report.rows[0].kde_average);
}

TEST_CASE("missing artifacts fail naming the fit command") {
    const Cohort cohort = generate_cohort(small_config());
    EvalConfig config;
    config.split_plan.n_splits = 5;
    config.jobs = 1;
    const Artifacts fitted = fit_artifacts(cohort.dataset, 42, 0.05, 100, 0.05, 100, 0, false);

    auto expect_missing = [&](const Artifacts& artifacts, std::vector<Metric> metrics,
                              const std::string& command) {
        EvalConfig c = config;
        c.metrics = std::move(metrics);
        try {
            run_evaluation(cohort.dataset, artifacts, c);
            FAIL("expected MissingArtifact for " << command);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MissingArtifact);
            CHECK(std::string(e.what()).find(command) != std::string::npos);
        }
    };

    expect_missing({}, {Metric::WeightedCosine}, "ibis fit --metric weighted");
    expect_missing({}, {Metric::PrunedCosine}, "ibis fit --metric pruned");
    expect_missing({}, {Metric::Ensemble}, "ibis fit --metric weighted");

    Artifacts no_ensemble;
    no_ensemble.weighted = fitted.weighted;
    no_ensemble.pruned = fitted.pruned;
    expect_missing(no_ensemble, {Metric::Ensemble}, "ibis fit --metric ensemble");

    // metrics that need no artifact run fine without any
    EvalConfig bare = config;
    bare.metrics = {Metric::Semantic, Metric::Cosine, Metric::Ibis};
    CHECK_NOTHROW(run_evaluation(cohort.dataset, {}, bare));
}

TEST_CASE("participants under the judgement floor are reported but not scored") {
    const Cohort cohort = generate_cohort(small_config());
    Dataset dataset = cohort.dataset;
    const std::string victim = dataset.participant_ids().front();
    std::vector<JudgementRecord> kept;
    for (const auto& j : dataset.judgements)
        if (j.participant_id != victim || j.trial_index < 5) kept.push_back(j);
    dataset.judgements = std::move(kept);

    const Artifacts artifacts = fit_artifacts(dataset, 42, 0.05, 100, 0.05, 100, 0, false);
    EvalConfig config;
    config.metrics = {Metric::Cosine, Metric::Ibis};
    config.split_plan.n_splits = 5;
    config.min_judgements = 10;
    config.jobs = 1;
    const EvalOutput output = run_evaluation(dataset, artifacts, config);

    CHECK(output.report.n_participants == 4);
    CHECK(output.report.participants_evaluated == 3);
    bool found = false;
    for (const auto& d : output.report.participants) {
        if (d.participant_id != victim) {
            CHECK(d.evaluated);
            continue;
        }
        found = true;
        CHECK_FALSE(d.evaluated);
        CHECK(d.n_judgements == 5);
        CHECK(d.kde_scores.empty());
    }
    CHECK(found);
    for (const auto& r : output.report.rows) CHECK(r.kde_individual.n == 3);

    SUBCASE("individual scoring rejects the same participant") {
        try {
            evaluate_metric_individual(Metric::Cosine, dataset, artifacts, config, victim);
            FAIL("expected TooFewJudgements");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::TooFewJudgements);
        }
    }

    SUBCASE("unknown participants are rejected outright") {
        try {
            compute_individual_points(dataset, artifacts, config, "nobody");
            FAIL("expected UnknownParticipant");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UnknownParticipant);
        }
    }
}

TEST_CASE("individual point sets pair the twin with the participant's record") {
    const Cohort cohort = generate_cohort(small_config());
    const Dataset& dataset = cohort.dataset;
    const Artifacts artifacts = fit_artifacts(dataset, 42, 0.05, 100, 0.05, 100, 0, false);

    EvalConfig config;
    config.metrics = with_human();
    config.split_plan.n_splits = 5;
    config.jobs = 1;
    const std::string pid = dataset.participant_ids().front();
    const IndividualPoints ind = compute_individual_points(dataset, artifacts, config, pid);

    CHECK(ind.twin.trace.trials.size() == 12);
    CHECK(ind.points.at(Metric::Ibis).size() == dataset.emails.size());
    const std::size_t observed = observed_unique_of(dataset, pid);
    CHECK(ind.observed_emails.size() == observed);
    CHECK(ind.points.at(Metric::Human).size() == observed);
    for (Metric m : {Metric::Semantic, Metric::Cosine, Metric::WeightedCosine,
                     Metric::PrunedCosine, Metric::Ensemble})
        CHECK(ind.points.at(m).size() == observed);
    std::set<std::string> unique(ind.observed_emails.begin(), ind.observed_emails.end());
    CHECK(unique.size() == ind.observed_emails.size());
}

TEST_CASE("report json survives a round trip and renders every metric") {
    const Cohort cohort = generate_cohort(small_config());
    const Artifacts artifacts = fit_artifacts(cohort.dataset, 42, 0.05, 100, 0.05, 100, 0, false);

    EvalConfig config;
    config.metrics = with_human();
    config.split_plan.n_splits = 5;
    config.jobs = 1;
    const Report report = run_evaluation(cohort.dataset, artifacts, config).report;

    const std::string path = "harness_report_roundtrip.json";
    write_report_json(report, path);
    const Report loaded = load_report_json(path);
    std::remove(path.c_str());

    CHECK(loaded.n_emails == report.n_emails);
    CHECK(loaded.n_participants == report.n_participants);
    CHECK(loaded.participants_evaluated == report.participants_evaluated);
    CHECK(loaded.seed == report.seed);
    CHECK(loaded.kde_fit_on_human == report.kde_fit_on_human);
    CHECK(loaded.human_softmax_form == report.human_softmax_form);
    REQUIRE(loaded.rows.size() == report.rows.size());
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        CHECK(loaded.rows[i].metric == report.rows[i].metric);
        CHECK(loaded.rows[i].kde_average == report.rows[i].kde_average);
        CHECK(loaded.rows[i].kde_individual.mean == report.rows[i].kde_individual.mean);
        CHECK(loaded.rows[i].kde_individual.sd == report.rows[i].kde_individual.sd);
        CHECK(loaded.rows[i].regression.mean == report.rows[i].regression.mean);
        CHECK(loaded.rows[i].prediction.mean == report.rows[i].prediction.mean);
        CHECK(loaded.rows[i].coverage_mean == report.rows[i].coverage_mean);
    }
    REQUIRE(loaded.participants.size() == report.participants.size());
    for (std::size_t p = 0; p < report.participants.size(); ++p) {
        CHECK(loaded.participants[p].participant_id == report.participants[p].participant_id);
        CHECK(loaded.participants[p].kde_scores == report.participants[p].kde_scores);
        CHECK(loaded.participants[p].fit_counts == report.participants[p].fit_counts);
    }

    const std::string table = render_report_table(report);
    for (Metric m : config.metrics)
        CHECK(table.find(metric_name(m)) != std::string::npos);
}

TEST_CASE("bundled cohort orders the metric family as designed") {
    const Cohort cohort = generate_cohort(CohortConfig{});
    const Dataset& dataset = cohort.dataset;
    const Artifacts artifacts = fit_artifacts(dataset, 42, 1.0, 1500, 0.2, 800, 0, true);

    EvalConfig config;
    config.metrics = with_human();
    config.seed = 42;
    config.human_options.softmax_form = true;
    config.jobs = 0;
    const EvalOutput output = run_evaluation(dataset, artifacts, config);
    const Report& report = output.report;

    REQUIRE(report.participants_evaluated == 20);
    const EvalRow& human = row_of(report, Metric::Human);
    const EvalRow& sem = row_of(report, Metric::Semantic);
    const EvalRow& cos = row_of(report, Metric::Cosine);
    const EvalRow& wtd = row_of(report, Metric::WeightedCosine);
    const EvalRow& prn = row_of(report, Metric::PrunedCosine);
    const EvalRow& ens = row_of(report, Metric::Ensemble);
    const EvalRow& ibis = row_of(report, Metric::Ibis);

    SUBCASE("individual-kde means rank ibis, ensemble, fitted pair, unfitted pair") {
        CHECK(ibis.kde_individual.mean >= ens.kde_individual.mean);
        CHECK(ens.kde_individual.mean >= wtd.kde_individual.mean);
        CHECK(ens.kde_individual.mean >= prn.kde_individual.mean);
        for (double fitted : {wtd.kde_individual.mean, prn.kde_individual.mean})
            for (double unfitted : {sem.kde_individual.mean, cos.kde_individual.mean})
                CHECK(fitted >= unfitted);
    }

    SUBCASE("twin beats raw cosine on the average column") {
        CHECK(ibis.kde_average > cos.kde_average);
    }

    SUBCASE("human self-fit stays on top") {
        for (const auto& r : report.rows) {
            CHECK(human.kde_average >= r.kde_average);
            CHECK(human.kde_individual.mean >= r.kde_individual.mean);
        }
    }

    SUBCASE("most participants prefer their own twin") {
        std::size_t wins = 0;
        for (const auto& d : report.participants) {
            REQUIRE(d.evaluated);
            if (d.kde_scores.at(Metric::Ibis) > d.kde_scores.at(Metric::Ensemble) &&
                d.kde_scores.at(Metric::Ibis) > d.kde_scores.at(Metric::Cosine))
                ++wins;
        }
        CHECK(double(wins) >= 0.7 * double(report.participants.size()));
    }

    SUBCASE("twin covers the corpus, human cloud covers the judged emails") {
        CHECK(ibis.coverage_mean == doctest::Approx(60.0));
        std::set<std::string> judged;
        for (const auto& j : dataset.judgements) judged.insert(j.email_id);
        CHECK(output.points.average.at(Metric::Human).size() == judged.size());
        CHECK(output.points.average.at(Metric::Ibis).size() == dataset.emails.size());
    }

    SUBCASE("embedding-derived metrics separate the categories almost perfectly") {
        CHECK(cos.regression.mean >= 0.95);
        CHECK(wtd.regression.mean >= 0.95);
        CHECK(prn.regression.mean >= 0.95);
    }
}
