#include "ibis/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "ibis/csv.hpp"
#include "ibis/dataset_io.hpp"
#include "ibis/errors.hpp"
#include "ibis/rng.hpp"

namespace ibis {

using nlohmann::json;

namespace {

std::array<double, 2> as_xy(const SimilarityPoint& p) { return {p.sim_phishing, p.sim_ham}; }

std::vector<std::array<double, 2>> as_xy(const std::vector<SimilarityPoint>& points) {
    std::vector<std::array<double, 2>> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(as_xy(p));
    return out;
}

bool selected(const EvalConfig& config, Metric m) {
    return std::find(config.metrics.begin(), config.metrics.end(), m) != config.metrics.end();
}

void require_artifacts(const EvalConfig& config, const Artifacts& artifacts) {
    const bool needs_weighted =
        selected(config, Metric::WeightedCosine) || selected(config, Metric::Ensemble);
    const bool needs_pruned =
        selected(config, Metric::PrunedCosine) || selected(config, Metric::Ensemble);
    if (needs_weighted && !artifacts.weighted)
        fail(ErrorKind::MissingArtifact,
             "weighted cosine needs a fitted weight vector; run `ibis fit --metric weighted` "
             "first");
    if (needs_pruned && !artifacts.pruned)
        fail(ErrorKind::MissingArtifact,
             "pruned cosine needs a fitted mask; run `ibis fit --metric pruned` first");
    if (selected(config, Metric::Ensemble) && !artifacts.ensemble)
        fail(ErrorKind::MissingArtifact,
             "ensemble needs fitted weights; run `ibis fit --metric ensemble` first");
}

Prototypes harness_prototypes(const Dataset& dataset, const EvalConfig& config) {
    std::vector<int> labels;
    labels.reserve(dataset.emails.size());
    for (const auto& e : dataset.emails)
        labels.push_back(e.category == Category::Phishing ? 1 : 0);
    Rng rng(derive_seed(config.seed, "prototype_split"));
    const auto train_idx = stratified_split(labels, config.fit.train_fraction, rng);
    return compute_prototypes(dataset, train_idx);
}

// Raw baseline point for one email; ensemble combines the other four.
SimilarityPoint raw_baseline_point(Metric metric, const Dataset& dataset, std::size_t email_idx,
                                   const Prototypes& protos, const Artifacts& artifacts) {
    const EmailDoc& email = dataset.emails[email_idx];
    const Embedding& emb = dataset.embeddings[email_idx];
    switch (metric) {
        case Metric::Semantic: return semantic_point(email, protos);
        case Metric::Cosine: return cosine_point(emb, protos);
        case Metric::WeightedCosine:
            return weighted_cosine_point(emb, artifacts.weighted->prototypes,
                                         artifacts.weighted->weights);
        case Metric::PrunedCosine:
            return pruned_cosine_point(emb, artifacts.pruned->prototypes,
                                       artifacts.pruned->mask);
        default: break;
    }
    fail(ErrorKind::BadConfig, std::string(metric_name(metric)) + " is not a baseline metric");
}

// Evaluation-space baseline points for every dataset email, in email order.
std::vector<SimilarityPoint> baseline_points_all(Metric metric, const Dataset& dataset,
                                                 const Prototypes& protos,
                                                 const Artifacts& artifacts) {
    std::vector<SimilarityPoint> out;
    out.reserve(dataset.emails.size());
    if (metric == Metric::Ensemble) {
        for (std::size_t i = 0; i < dataset.emails.size(); ++i) {
            std::vector<SimilarityPoint> components;
            for (Metric m : artifacts.ensemble->components)
                components.push_back(
                    to_eval_space(raw_baseline_point(m, dataset, i, protos, artifacts)));
            out.push_back(ensemble_point(dataset.emails[i].id, components,
                                         artifacts.ensemble->weights));
        }
        return out;
    }
    for (std::size_t i = 0; i < dataset.emails.size(); ++i)
        out.push_back(to_eval_space(raw_baseline_point(metric, dataset, i, protos, artifacts)));
    return out;
}

// Human points per email over a set of normalized records, keyed by email id.
std::map<std::string, SimilarityPoint> human_points_by_email(
    const std::vector<JudgementRecord>& normalized, const HumanPointOptions& options) {
    std::map<std::string, std::vector<JudgementRecord>> by_email;
    for (const auto& j : normalized) by_email[j.email_id].push_back(j);
    std::map<std::string, SimilarityPoint> out;
    for (const auto& [email_id, recs] : by_email)
        out.emplace(email_id, human_subjective_point(email_id, recs, options));
    return out;
}

// unique observed email ids in first-appearance order
std::vector<std::string> observed_emails_of(const std::vector<JudgementRecord>& records) {
    std::vector<std::string> out;
    for (const auto& j : records)
        if (std::find(out.begin(), out.end(), j.email_id) == out.end())
            out.push_back(j.email_id);
    return out;
}

IblParameters twin_params_for(const EvalConfig& config, const std::string& participant_id) {
    IblParameters params = config.ibl;
    params.rng_seed = derive_seed(config.seed, "twin/" + participant_id);
    return params;
}

struct ParticipantWork {
    ParticipantDetail detail;
    std::vector<SimilarityPoint> ibis_points; // all emails, eval space (empty if skipped)
};

ParticipantWork evaluate_participant(const std::string& pid, const Dataset& dataset,
                                     const EvalConfig& config,
                                     const std::map<Metric, std::vector<SimilarityPoint>>&
                                         baseline_by_metric) {
    ParticipantWork work;
    work.detail.participant_id = pid;

    const auto records = dataset.judgements_of(pid);
    work.detail.n_judgements = records.size();
    const auto observed = observed_emails_of(records);
    work.detail.observed_unique = observed.size();
    if (records.size() < config.min_judgements) return work;
    work.detail.evaluated = true;

    const auto normalized = normalize_judgements(records, Grouping::PerParticipant).records;
    const auto human_points = human_points_by_email(normalized, config.human_options);
    std::vector<SimilarityPoint> human_vec;
    for (const auto& id : observed) human_vec.push_back(human_points.at(id));
    const auto human_xy = as_xy(human_vec);

    const bool needs_twin = selected(config, Metric::Ibis);
    TwinResult twin;
    std::map<std::string, SimilarityPoint> ibis_by_email;
    if (needs_twin) {
        const IblParameters params = twin_params_for(config, pid);
        twin = twin_replay(records, dataset, params, config.twin_options);
        work.ibis_points.reserve(dataset.emails.size());
        for (std::size_t i = 0; i < dataset.emails.size(); ++i) {
            auto point = ibis_point(dataset.emails[i].id, twin.memory, dataset.embeddings[i],
                                    params);
            ibis_by_email.emplace(point.email_id, point);
            work.ibis_points.push_back(std::move(point));
        }
    }

    for (Metric metric : config.metrics) {
        // individual fit set: own human points for Human, every dataset
        // email for Ibis, observed emails only for the baselines
        std::vector<SimilarityPoint> fit_vec;
        if (metric == Metric::Human) {
            fit_vec = human_vec;
        } else if (metric == Metric::Ibis) {
            fit_vec = work.ibis_points;
        } else {
            const auto& all_points = baseline_by_metric.at(metric);
            for (const auto& id : observed) fit_vec.push_back(all_points[dataset.index_of(id)]);
        }
        work.detail.fit_counts[metric] = fit_vec.size();

        auto fit_xy = as_xy(fit_vec);
        const auto& eval_xy = human_xy;
        const KdeScore score = config.kde_fit_on_human
                                   ? kde_log_score(kde_fit(eval_xy), fit_xy)
                                   : kde_log_score(kde_fit(fit_xy), eval_xy);
        work.detail.kde_scores[metric] = score.total;

        // next-decision forecasting: the twin predicts natively, the other
        // metrics drive an incrementally refit classifier
        if (metric == Metric::Ibis) {
            work.detail.prediction[metric] = prediction_accuracy(twin.trace);
        } else {
            std::vector<std::array<double, 2>> features;
            std::vector<int> labels;
            features.reserve(records.size());
            for (const auto& j : records) {
                const SimilarityPoint& p =
                    metric == Metric::Human
                        ? human_points.at(j.email_id)
                        : baseline_by_metric.at(metric)[dataset.index_of(j.email_id)];
                features.push_back(as_xy(p));
                labels.push_back(j.decision == Category::Phishing ? 1 : 0);
            }
            work.detail.prediction[metric] = next_decision_accuracy(features, labels);
        }
    }
    return work;
}

} // namespace

EvalOutput run_evaluation(const Dataset& dataset, const Artifacts& artifacts,
                          const EvalConfig& config) {
    if (config.metrics.empty()) fail(ErrorKind::BadConfig, "no metrics selected");
    require_artifacts(config, artifacts);
    config.ibl.validate();
    config.fit.validate();
    config.split_plan.validate();

    const Prototypes protos = harness_prototypes(dataset, config);

    // average-level point sets for every selected baseline
    std::map<Metric, std::vector<SimilarityPoint>> baseline_by_metric;
    for (Metric m : config.metrics)
        if (m != Metric::Human && m != Metric::Ibis)
            baseline_by_metric.emplace(m, baseline_points_all(m, dataset, protos, artifacts));

    // average-level human points: all participants pooled, global scaling
    if (dataset.judgements.empty())
        fail(ErrorKind::NoJudgements, "dataset has no judgements to evaluate against");
    const auto normalized_all = normalize_judgements(dataset.judgements, Grouping::Global).records;
    const auto human_avg_map = human_points_by_email(normalized_all, config.human_options);
    std::vector<SimilarityPoint> human_avg;
    for (const auto& email : dataset.emails) {
        auto it = human_avg_map.find(email.id);
        if (it != human_avg_map.end()) human_avg.push_back(it->second);
    }

    // participant pass, parallel with deterministic slot assembly
    const auto participant_ids = dataset.participant_ids();
    std::vector<ParticipantWork> slots(participant_ids.size());
    unsigned jobs = config.jobs ? config.jobs : std::thread::hardware_concurrency();
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(participant_ids.size())));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < participant_ids.size(); ++i)
            slots[i] = evaluate_participant(participant_ids[i], dataset, config,
                                            baseline_by_metric);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= participant_ids.size()) return;
                try {
                    slots[i] = evaluate_participant(participant_ids[i], dataset, config,
                                                    baseline_by_metric);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    EvalOutput output;
    Report& report = output.report;
    report.n_emails = dataset.emails.size();
    report.n_participants = participant_ids.size();
    report.seed = config.seed;
    report.kde_fit_on_human = config.kde_fit_on_human;
    report.human_softmax_form = config.human_options.softmax_form;
    for (auto& work : slots) {
        report.participants_evaluated += work.detail.evaluated ? 1 : 0;
        report.participants.push_back(work.detail);
    }

    // Ibis average-level points: per-email mean over evaluated twins
    std::vector<SimilarityPoint> ibis_avg;
    if (selected(config, Metric::Ibis)) {
        std::size_t n_twins = 0;
        std::vector<double> sum_p(dataset.emails.size(), 0.0), sum_h(dataset.emails.size(), 0.0);
        for (const auto& work : slots) {
            if (work.ibis_points.empty()) continue;
            ++n_twins;
            for (std::size_t i = 0; i < dataset.emails.size(); ++i) {
                sum_p[i] += work.ibis_points[i].sim_phishing;
                sum_h[i] += work.ibis_points[i].sim_ham;
            }
        }
        if (n_twins == 0)
            fail(ErrorKind::TooFewJudgements,
                 "no participant reached min_judgements; nothing to average for ibis");
        for (std::size_t i = 0; i < dataset.emails.size(); ++i) {
            SimilarityPoint p;
            p.email_id = dataset.emails[i].id;
            p.source_metric = Metric::Ibis;
            p.sim_phishing = sum_p[i] / static_cast<double>(n_twins);
            p.sim_ham = sum_h[i] / static_cast<double>(n_twins);
            ibis_avg.push_back(std::move(p));
        }
    }

    output.points.average.emplace(Metric::Human, human_avg);
    for (auto& [m, pts] : baseline_by_metric) output.points.average.emplace(m, pts);
    if (!ibis_avg.empty()) output.points.average.emplace(Metric::Ibis, ibis_avg);

    const auto human_avg_xy = as_xy(human_avg);
    const SplitPlan regression_plan{config.split_plan.n_splits, config.split_plan.train_fraction,
                                    derive_seed(config.seed, "regression")};

    for (Metric metric : config.metrics) {
        EvalRow row;
        row.metric = metric;

        const std::vector<SimilarityPoint>& avg_points =
            metric == Metric::Human ? human_avg
            : metric == Metric::Ibis ? ibis_avg
                                     : baseline_by_metric.at(metric);
        const auto avg_xy = as_xy(avg_points);
        const KdeScore avg_score = config.kde_fit_on_human
                                       ? kde_log_score(kde_fit(human_avg_xy), avg_xy)
                                       : kde_log_score(kde_fit(avg_xy), human_avg_xy);
        row.kde_average = avg_score.total;
        row.kde_average_floored = avg_score.floored_points;

        // classifier separability of the metric's average points against
        // the true categories, over repeated stratified splits
        std::vector<int> labels;
        for (const auto& p : avg_points)
            labels.push_back(dataset.email_of(p.email_id).category == Category::Phishing ? 1
                                                                                         : 0);
        row.regression = regression_accuracy(avg_xy, labels, regression_plan);

        std::vector<double> kde_ind, pred_ind, coverage;
        for (const auto& detail : report.participants) {
            if (!detail.evaluated) continue;
            kde_ind.push_back(detail.kde_scores.at(metric));
            pred_ind.push_back(detail.prediction.at(metric));
            coverage.push_back(static_cast<double>(detail.fit_counts.at(metric)));
        }
        row.kde_individual = summarize(kde_ind);
        row.prediction = summarize(pred_ind);
        row.coverage_mean = summarize(coverage).mean;

        report.rows.push_back(std::move(row));
    }
    return output;
}

KdeScore evaluate_metric_average(Metric metric, const Dataset& dataset,
                                 const Artifacts& artifacts, const EvalConfig& config) {
    EvalConfig narrowed = config;
    narrowed.metrics = {metric};
    const EvalOutput output = run_evaluation(dataset, artifacts, narrowed);
    KdeScore score;
    score.total = output.report.rows.at(0).kde_average;
    score.floored_points = output.report.rows.at(0).kde_average_floored;
    return score;
}

KdeScore evaluate_metric_individual(Metric metric, const Dataset& dataset,
                                    const Artifacts& artifacts, const EvalConfig& config,
                                    const std::string& participant_id) {
    EvalConfig narrowed = config;
    narrowed.metrics = {metric};
    const auto individual = compute_individual_points(dataset, artifacts, narrowed,
                                                      participant_id);
    const auto eval_xy = as_xy(individual.points.at(Metric::Human));
    const auto fit_xy = as_xy(individual.points.at(metric));
    return config.kde_fit_on_human ? kde_log_score(kde_fit(eval_xy), fit_xy)
                                   : kde_log_score(kde_fit(fit_xy), eval_xy);
}

IndividualPoints compute_individual_points(const Dataset& dataset, const Artifacts& artifacts,
                                           const EvalConfig& config,
                                           const std::string& participant_id) {
    require_artifacts(config, artifacts);
    const auto records = dataset.judgements_of(participant_id);
    if (records.empty())
        fail(ErrorKind::UnknownParticipant,
             "no judgements for participant '" + participant_id + "'");
    if (records.size() < config.min_judgements)
        fail(ErrorKind::TooFewJudgements,
             "participant '" + participant_id + "' has " + std::to_string(records.size()) +
                 " judgements; need " + std::to_string(config.min_judgements));

    IndividualPoints out;
    out.observed_emails = observed_emails_of(records);

    const auto normalized = normalize_judgements(records, Grouping::PerParticipant).records;
    const auto human_map = human_points_by_email(normalized, config.human_options);
    std::vector<SimilarityPoint> human_vec;
    for (const auto& id : out.observed_emails) human_vec.push_back(human_map.at(id));
    out.points.emplace(Metric::Human, std::move(human_vec));

    const Prototypes protos = harness_prototypes(dataset, config);
    for (Metric metric : config.metrics) {
        if (metric == Metric::Human || metric == Metric::Ibis) continue;
        const auto all_points = baseline_points_all(metric, dataset, protos, artifacts);
        std::vector<SimilarityPoint> subset;
        for (const auto& id : out.observed_emails) subset.push_back(all_points[dataset.index_of(id)]);
        out.points.emplace(metric, std::move(subset));
    }

    if (selected(config, Metric::Ibis)) {
        const IblParameters params = twin_params_for(config, participant_id);
        out.twin = twin_replay(records, dataset, params, config.twin_options);
        std::vector<SimilarityPoint> ibis_vec;
        ibis_vec.reserve(dataset.emails.size());
        for (std::size_t i = 0; i < dataset.emails.size(); ++i)
            ibis_vec.push_back(ibis_point(dataset.emails[i].id, out.twin.memory,
                                          dataset.embeddings[i], params));
        out.points.emplace(Metric::Ibis, std::move(ibis_vec));
    }
    return out;
}

// ---------------------------------------------------------------- reports ---

namespace {

json mean_sd_to_json(const MeanSd& m) {
    return json{{"mean", m.mean}, {"sd", m.sd}, {"n", m.n}};
}

MeanSd mean_sd_from_json(const json& j) {
    MeanSd m;
    m.mean = j.at("mean").get<double>();
    m.sd = j.at("sd").get<double>();
    m.n = j.at("n").get<std::size_t>();
    return m;
}

} // namespace

void write_report_json(const Report& report, const std::string& path) {
    json rows = json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"metric", metric_name(row.metric)},
                        {"kde_score_average", row.kde_average},
                        {"kde_average_floored_points", row.kde_average_floored},
                        {"kde_score_individuals", mean_sd_to_json(row.kde_individual)},
                        {"regression_accuracy", mean_sd_to_json(row.regression)},
                        {"prediction_accuracy", mean_sd_to_json(row.prediction)},
                        {"individual_coverage_mean", row.coverage_mean}});
    json participants = json::array();
    for (const auto& d : report.participants) {
        json kde, counts, pred;
        for (const auto& [m, v] : d.kde_scores) kde[metric_name(m)] = v;
        for (const auto& [m, v] : d.fit_counts) counts[metric_name(m)] = v;
        for (const auto& [m, v] : d.prediction) pred[metric_name(m)] = v;
        participants.push_back({{"participant_id", d.participant_id},
                                {"n_judgements", d.n_judgements},
                                {"observed_unique", d.observed_unique},
                                {"evaluated", d.evaluated},
                                {"kde_scores", kde},
                                {"fit_point_counts", counts},
                                {"prediction_accuracy", pred}});
    }
    json doc = {{"n_emails", report.n_emails},
                {"n_participants", report.n_participants},
                {"participants_evaluated", report.participants_evaluated},
                {"seed", report.seed},
                {"kde_fit_on_human", report.kde_fit_on_human},
                {"human_softmax_form", report.human_softmax_form},
                {"rows", rows},
                {"participants", participants}};
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
    out << doc.dump(2) << '\n';
    if (!out) fail(ErrorKind::IoFailure, "short write to " + path);
}

Report load_report_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedRecord, path + ": invalid JSON: " + e.what());
    }
    Report report;
    report.n_emails = doc.at("n_emails").get<std::size_t>();
    report.n_participants = doc.at("n_participants").get<std::size_t>();
    report.participants_evaluated = doc.at("participants_evaluated").get<std::size_t>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.kde_fit_on_human = doc.at("kde_fit_on_human").get<bool>();
    report.human_softmax_form = doc.at("human_softmax_form").get<bool>();
    for (const auto& r : doc.at("rows")) {
        EvalRow row;
        row.metric = metric_from_string(r.at("metric").get<std::string>());
        row.kde_average = r.at("kde_score_average").get<double>();
        row.kde_average_floored = r.at("kde_average_floored_points").get<std::size_t>();
        row.kde_individual = mean_sd_from_json(r.at("kde_score_individuals"));
        row.regression = mean_sd_from_json(r.at("regression_accuracy"));
        row.prediction = mean_sd_from_json(r.at("prediction_accuracy"));
        row.coverage_mean = r.at("individual_coverage_mean").get<double>();
        report.rows.push_back(std::move(row));
    }
    for (const auto& p : doc.at("participants")) {
        ParticipantDetail d;
        d.participant_id = p.at("participant_id").get<std::string>();
        d.n_judgements = p.at("n_judgements").get<std::size_t>();
        d.observed_unique = p.at("observed_unique").get<std::size_t>();
        d.evaluated = p.at("evaluated").get<bool>();
        for (const auto& [k, v] : p.at("kde_scores").items())
            d.kde_scores[metric_from_string(k)] = v.get<double>();
        for (const auto& [k, v] : p.at("fit_point_counts").items())
            d.fit_counts[metric_from_string(k)] = v.get<std::size_t>();
        for (const auto& [k, v] : p.at("prediction_accuracy").items())
            d.prediction[metric_from_string(k)] = v.get<double>();
        report.participants.push_back(std::move(d));
    }
    return report;
}

void write_report_csv(const Report& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"metric", "kde_score_average", "kde_individual_mean", "kde_individual_sd",
                    "regression_mean", "regression_sd", "prediction_mean", "prediction_sd",
                    "individual_coverage_mean"});
    for (const auto& row : report.rows)
        rows.push_back({metric_name(row.metric), format_double(row.kde_average),
                        format_double(row.kde_individual.mean),
                        format_double(row.kde_individual.sd), format_double(row.regression.mean),
                        format_double(row.regression.sd), format_double(row.prediction.mean),
                        format_double(row.prediction.sd), format_double(row.coverage_mean)});
    write_csv_file(path, rows);
}

std::string render_report_table(const Report& report) {
    auto fixed = [](double v, int precision) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
        return std::string(buf);
    };
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"metric", "kde avg", "kde individuals", "regression acc", "prediction acc"});
    for (const auto& row : report.rows)
        cells.push_back({metric_name(row.metric), fixed(row.kde_average, 2),
                         fixed(row.kde_individual.mean, 2) + " +- " +
                             fixed(row.kde_individual.sd, 2),
                         fixed(row.regression.mean, 3) + " +- " + fixed(row.regression.sd, 3),
                         fixed(row.prediction.mean, 3) + " +- " + fixed(row.prediction.sd, 3)});
    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& r : cells)
        for (std::size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < cells[i].size(); ++c) {
            out += cells[i][c];
            out.append(widths[c] - cells[i][c].size() + (c + 1 < widths.size() ? 2 : 0), ' ');
        }
        out += '\n';
        if (i == 0) {
            const std::size_t total = std::accumulate(widths.begin(), widths.end(),
                                                      std::size_t{0}) +
                                      2 * (widths.size() - 1);
            out.append(total, '-');
            out += '\n';
        }
    }
    return out;
}

void write_points_csv(const std::vector<std::vector<SimilarityPoint>>& point_sets,
                      const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"email_id", "metric", "sim_phishing", "sim_ham"});
    for (const auto& set : point_sets)
        for (const auto& p : set)
            rows.push_back({p.email_id, metric_name(p.source_metric),
                            format_double(p.sim_phishing), format_double(p.sim_ham)});
    write_csv_file(path, rows);
}

} // namespace ibis
