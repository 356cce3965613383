#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ibis/csv.hpp"
#include "ibis/dataset_io.hpp"
#include "ibis/errors.hpp"
#include "ibis/fitting.hpp"
#include "ibis/harness.hpp"
#include "ibis/ibl.hpp"
#include "ibis/metrics.hpp"
#include "ibis/rng.hpp"
#include "ibis/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ibis;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("IBIS_SEED")) {
        std::uint64_t v = 0;
        const char* end = env + std::string_view(env).size();
        auto [p, ec] = std::from_chars(env, end, v);
        if (ec != std::errc{} || p != end)
            throw UsageError(std::string("IBIS_SEED is not an unsigned integer: '") + env + "'");
        return v;
    }
    return 42;
}

std::string embeddings_path_in(const std::string& dir) {
    const std::string bin = dir + "/embeddings.bin";
    if (fs::exists(bin)) return bin;
    return dir + "/embeddings.csv";
}

Dataset load_data_dir(const std::string& dir) {
    return load_dataset(dir + "/emails.jsonl", embeddings_path_in(dir),
                        dir + "/judgements.csv");
}

Artifacts load_artifacts_dir(const std::string& dir) {
    Artifacts artifacts;
    if (fs::exists(dir + "/weighted_cosine.json"))
        artifacts.weighted = load_weight_artifact(dir + "/weighted_cosine.json");
    if (fs::exists(dir + "/pruned_cosine.json"))
        artifacts.pruned = load_prune_artifact(dir + "/pruned_cosine.json");
    if (fs::exists(dir + "/ensemble.json"))
        artifacts.ensemble = load_ensemble_artifact(dir + "/ensemble.json");
    return artifacts;
}

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
    out << doc.dump(2) << '\n';
    if (!out) fail(ErrorKind::IoFailure, "short write to " + path);
}

json ibl_to_json(const IblParameters& p) {
    json j = {{"decay", p.decay},
              {"mismatch_penalty", p.mismatch_penalty},
              {"attribute_weight", p.attribute_weight},
              {"noise_scale", p.noise_scale},
              {"default_utility", p.default_utility},
              {"noise_mode", p.noise_mode == NoiseMode::MeanZero ? "mean-zero"
                                                                 : "literal-minus-one"},
              {"attribute_mode", p.attribute_mode == AttributeMode::CompositeCosine
                                     ? "composite"
                                     : "per-dimension"}};
    if (p.temperature)
        j["temperature"] = *p.temperature;
    else
        j["temperature"] = nullptr;
    return j;
}

json fit_to_json(const FitConfig& c) {
    return {{"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"convergence_tol", c.convergence_tol},
            {"rng_seed", c.rng_seed},
            {"train_fraction", c.train_fraction}};
}

json report_to_json(const FitReport& r) {
    return {{"initial_loss", r.initial_loss},
            {"final_loss", r.final_loss},
            {"iterations_run", r.iterations_run},
            {"converged", r.converged},
            {"loss_trajectory", r.loss_trajectory}};
}

std::vector<Metric> parse_metric_list(const std::string& csv) {
    std::vector<Metric> out;
    std::string token;
    std::istringstream stream(csv);
    while (std::getline(stream, token, ',')) {
        const auto begin = token.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const auto end = token.find_last_not_of(" \t");
        try {
            out.push_back(metric_from_string(token.substr(begin, end - begin + 1)));
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    if (out.empty()) throw UsageError("--metrics selected nothing");
    return out;
}

// Train-email indices for fitting, shared with the harness so that
// prototypes computed here match what eval recomputes for the same seed.
std::vector<std::size_t> prototype_split(const Dataset& dataset, double train_fraction,
                                         std::uint64_t seed) {
    std::vector<int> labels;
    labels.reserve(dataset.emails.size());
    for (const auto& e : dataset.emails)
        labels.push_back(e.category == Category::Phishing ? 1 : 0);
    Rng rng(derive_seed(seed, "prototype_split"));
    return stratified_split(labels, train_fraction, rng);
}

std::map<std::string, SimilarityPoint> human_target_points(const Dataset& dataset,
                                                           const HumanPointOptions& options) {
    if (dataset.judgements.empty())
        fail(ErrorKind::NoJudgements, "dataset has no judgements to fit against");
    const auto normalized = normalize_judgements(dataset.judgements, Grouping::Global).records;
    std::map<std::string, std::vector<JudgementRecord>> by_email;
    for (const auto& j : normalized) by_email[j.email_id].push_back(j);
    std::map<std::string, SimilarityPoint> out;
    for (const auto& [email_id, recs] : by_email)
        out.emplace(email_id, human_subjective_point(email_id, recs, options));
    return out;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::IoFailure, "cannot create " + dir + ": " + ec.message());
}

// ------------------------------------------------------------------ synth ---

struct SynthOpts {
    std::string out;
    std::optional<std::uint64_t> seed;
    CohortConfig cohort;
};

void cmd_synth(const SynthOpts& opts) {
    CohortConfig config = opts.cohort;
    config.rng_seed = resolve_seed(opts.seed);
    const Cohort cohort = generate_cohort(config);
    ensure_out_dir(opts.out);
    write_cohort(cohort, opts.out);

    json resolved = {{"subcommand", "synth"},
                     {"out", opts.out},
                     {"seed", config.rng_seed},
                     {"emails_per_category", config.emails_per_category},
                     {"dimension", config.dimension},
                     {"category_separation", config.category_separation},
                     {"embedding_noise", config.embedding_noise},
                     {"participants", config.participants},
                     {"decay_range", {config.decay_range.lo, config.decay_range.hi}},
                     {"sigma_range", {config.sigma_range.lo, config.sigma_range.hi}},
                     {"trials_pre", config.trials_pre},
                     {"trials_train", config.trials_train},
                     {"trials_post", config.trials_post}};
    write_json_file(resolved, opts.out + "/synth_config.json");

    for (const char* name :
         {"emails.jsonl", "embeddings.bin", "judgements.csv", "ground_truth.json",
          "synth_config.json"})
        std::cout << opts.out << "/" << name << "\n";
}

// ----------------------------------------------------------- ingest-check ---

void cmd_ingest_check(const std::string& data) {
    const Dataset dataset = load_data_dir(data);
    std::size_t phishing = 0;
    for (const auto& e : dataset.emails) phishing += e.category == Category::Phishing ? 1 : 0;
    std::cout << "emails: " << dataset.emails.size() << " (" << phishing << " phishing, "
              << dataset.emails.size() - phishing << " ham)\n"
              << "embedding dimension: " << dataset.dimension << "\n"
              << "participants: " << dataset.participant_ids().size() << "\n"
              << "judgements: " << dataset.judgements.size() << "\n";
    const auto warnings = normalize_judgements(dataset.judgements, Grouping::Global).warnings;
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    std::cout << "ok\n";
}

// -------------------------------------------------------------------- fit ---

struct FitOpts {
    std::string data, out, metric;
    std::string artifacts; // ensemble inputs; defaults to out
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k;
    FitConfig fit;
    bool human_softmax = false;
};

void cmd_fit(const FitOpts& opts) {
    const std::uint64_t seed = resolve_seed(opts.seed);
    FitConfig fit = opts.fit;
    fit.rng_seed = seed;
    fit.validate();

    const Dataset dataset = load_data_dir(opts.data);
    const auto train_idx = prototype_split(dataset, fit.train_fraction, seed);
    const Prototypes protos = compute_prototypes(dataset, train_idx);
    const HumanPointOptions human_options{opts.human_softmax};
    const auto human_points = human_target_points(dataset, human_options);

    // only train emails someone actually judged carry a fitting target
    std::vector<std::size_t> judged_train;
    for (std::size_t i : train_idx)
        if (human_points.count(dataset.emails[i].id)) judged_train.push_back(i);
    std::vector<std::string> train_ids;
    for (std::size_t i : judged_train) train_ids.push_back(dataset.emails[i].id);

    ensure_out_dir(opts.out);
    json resolved = {{"subcommand", "fit"},
                     {"data", opts.data},
                     {"out", opts.out},
                     {"metric", opts.metric},
                     {"seed", seed},
                     {"fit", fit_to_json(fit)},
                     {"human_softmax_form", opts.human_softmax},
                     {"train_email_count", judged_train.size()}};

    if (opts.metric == "weighted") {
        const auto batch = build_weight_batch(dataset, judged_train, protos, human_points);
        const auto result = fit_weighted_cosine(batch, fit);
        WeightArtifact artifact{result.weights, protos, result.report, train_ids};
        save_weight_artifact(artifact, opts.out + "/weighted_cosine.json");
        write_json_file(report_to_json(result.report), opts.out + "/fit_report_weighted.json");
        write_json_file(resolved, opts.out + "/fit_weighted_config.json");
        std::cout << "weighted cosine: final loss " << result.report.final_loss << " after "
                  << result.report.iterations_run << " iterations ("
                  << (result.report.converged ? "converged" : "epoch limit") << ")\n"
                  << opts.out << "/weighted_cosine.json\n";
        return;
    }

    if (opts.metric == "pruned") {
        const auto ranking = rank_dimensions(dataset, judged_train);
        const std::size_t k = opts.k ? *opts.k : default_prune_k(dataset.dimension);
        const PruneMask mask = build_prune_mask(ranking, k);
        std::vector<std::size_t> constant_dims;
        for (std::size_t d = 0; d < ranking.constant_flags.size(); ++d)
            if (ranking.constant_flags[d]) constant_dims.push_back(d);
        PruneArtifact artifact{mask, k, protos, ranking.correlation, constant_dims, train_ids};
        save_prune_artifact(artifact, opts.out + "/pruned_cosine.json");

        json report = {{"k", k},
                       {"dimension", dataset.dimension},
                       {"kept", mask.kept_indices.size()},
                       {"constant_dims", constant_dims.size()},
                       {"identical_to_cosine", k == dataset.dimension}};
        write_json_file(report, opts.out + "/fit_report_pruned.json");
        resolved["k"] = k;
        write_json_file(resolved, opts.out + "/fit_pruned_config.json");
        std::cout << "pruned cosine: kept " << k << " of " << dataset.dimension
                  << " dimensions";
        if (k == dataset.dimension) std::cout << " (full mask: identical to cosine)";
        std::cout << "\n" << opts.out << "/pruned_cosine.json\n";
        return;
    }

    if (opts.metric == "ensemble") {
        const std::string artifacts_dir = opts.artifacts.empty() ? opts.out : opts.artifacts;
        const Artifacts inputs = load_artifacts_dir(artifacts_dir);
        if (!inputs.weighted)
            fail(ErrorKind::MissingArtifact,
                 "ensemble needs " + artifacts_dir +
                     "/weighted_cosine.json; run `ibis fit --metric weighted` first");
        if (!inputs.pruned)
            fail(ErrorKind::MissingArtifact,
                 "ensemble needs " + artifacts_dir +
                     "/pruned_cosine.json; run `ibis fit --metric pruned` first");

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
                email.id, to_eval_space(weighted_cosine_point(emb, inputs.weighted->prototypes,
                                                              inputs.weighted->weights)));
            component_points[3].emplace(
                email.id, to_eval_space(pruned_cosine_point(emb, inputs.pruned->prototypes,
                                                            inputs.pruned->mask)));
        }
        const auto batch = build_ensemble_batch(component_points, kEnsembleComponents,
                                                train_targets);
        const auto result = fit_ensemble(batch, fit);
        EnsembleArtifact artifact{result.components, result.weights, result.report, train_ids};
        save_ensemble_artifact(artifact, opts.out + "/ensemble.json");
        write_json_file(report_to_json(result.report), opts.out + "/fit_report_ensemble.json");
        resolved["artifacts"] = artifacts_dir;
        write_json_file(resolved, opts.out + "/fit_ensemble_config.json");
        std::cout << "ensemble: final loss " << result.report.final_loss << ", weights";
        for (std::size_t c = 0; c < result.components.size(); ++c)
            std::cout << " " << metric_name(result.components[c]) << "="
                      << result.weights[c];
        std::cout << "\n" << opts.out << "/ensemble.json\n";
        return;
    }

    throw UsageError("--metric must be weighted, pruned or ensemble");
}

// ------------------------------------------------------------------- eval ---

struct IblOverrides {
    std::optional<double> decay, mismatch_penalty, attribute_weight, noise_scale, temperature,
        default_utility;
    std::string noise_mode, attribute_mode;

    IblParameters apply(IblParameters base) const {
        if (decay) base.decay = *decay;
        if (mismatch_penalty) base.mismatch_penalty = *mismatch_penalty;
        if (attribute_weight) base.attribute_weight = *attribute_weight;
        if (noise_scale) base.noise_scale = *noise_scale;
        if (temperature) base.temperature = *temperature;
        if (default_utility) base.default_utility = *default_utility;
        if (!noise_mode.empty())
            base.noise_mode = noise_mode == "literal-minus-one" ? NoiseMode::LiteralMinusOne
                                                                : NoiseMode::MeanZero;
        if (!attribute_mode.empty())
            base.attribute_mode = attribute_mode == "per-dimension"
                                      ? AttributeMode::PerDimension
                                      : AttributeMode::CompositeCosine;
        return base;
    }
};

struct EvalOpts {
    std::string data, out, artifacts;
    std::string metrics = "semantic,cosine,weighted_cosine,pruned_cosine,ensemble,ibis";
    std::optional<std::uint64_t> seed;
    int n_splits = 100;
    double split_train_fraction = 0.5;
    double train_fraction = 0.5;
    std::size_t min_judgements = 10;
    unsigned jobs = 0;
    bool kde_fit_on_human = false;
    bool human_softmax = false;
    bool twin_noise_off = false;
    bool store_without_feedback = false;
    IblOverrides ibl;
};

EvalConfig build_eval_config(const EvalOpts& opts) {
    EvalConfig config;
    config.metrics = parse_metric_list(opts.metrics);
    config.seed = resolve_seed(opts.seed);
    config.split_plan.n_splits = opts.n_splits;
    config.split_plan.train_fraction = opts.split_train_fraction;
    config.fit.train_fraction = opts.train_fraction;
    config.fit.rng_seed = config.seed;
    config.ibl = opts.ibl.apply(config.ibl);
    config.human_options.softmax_form = opts.human_softmax;
    config.twin_options.noise_on = !opts.twin_noise_off;
    config.twin_options.store_without_feedback = opts.store_without_feedback;
    config.kde_fit_on_human = opts.kde_fit_on_human;
    config.min_judgements = opts.min_judgements;
    config.jobs = opts.jobs;
    return config;
}

json eval_config_to_json(const EvalConfig& config, const EvalOpts& opts,
                         const std::string& artifacts_dir) {
    json metrics = json::array();
    for (Metric m : config.metrics) metrics.push_back(metric_name(m));
    return {{"subcommand", "eval"},
            {"data", opts.data},
            {"out", opts.out},
            {"artifacts", artifacts_dir},
            {"seed", config.seed},
            {"metrics", metrics},
            {"split_plan",
             {{"n_splits", config.split_plan.n_splits},
              {"train_fraction", config.split_plan.train_fraction}}},
            {"fit", fit_to_json(config.fit)},
            {"ibl", ibl_to_json(config.ibl)},
            {"human_softmax_form", config.human_options.softmax_form},
            {"twin_options",
             {{"noise_on", config.twin_options.noise_on},
              {"store_without_feedback", config.twin_options.store_without_feedback}}},
            {"kde_fit_on_human", config.kde_fit_on_human},
            {"min_judgements", config.min_judgements},
            {"jobs", config.jobs}};
}

void cmd_eval(const EvalOpts& opts) {
    const EvalConfig config = build_eval_config(opts);
    const Dataset dataset = load_data_dir(opts.data);
    const std::string artifacts_dir = opts.artifacts.empty() ? opts.data : opts.artifacts;
    const Artifacts artifacts = load_artifacts_dir(artifacts_dir);

    const EvalOutput output = run_evaluation(dataset, artifacts, config);

    ensure_out_dir(opts.out);
    write_report_json(output.report, opts.out + "/report.json");
    write_report_csv(output.report, opts.out + "/report.csv");
    write_json_file(eval_config_to_json(config, opts, artifacts_dir),
                    opts.out + "/eval_config.json");

    // one scatter-data file per metric, paired with the human points
    const auto& human_avg = output.points.average.at(Metric::Human);
    for (const auto& [metric, points] : output.points.average) {
        if (metric == Metric::Human) continue;
        write_points_csv({human_avg, points},
                         opts.out + "/points_human_vs_" + metric_name(metric) + ".csv");
    }
    write_points_csv({human_avg}, opts.out + "/points_human.csv");

    std::cout << render_report_table(output.report) << "participants evaluated: "
              << output.report.participants_evaluated << " of "
              << output.report.n_participants << "\n"
              << opts.out << "/report.json\n";
}

// ------------------------------------------------------------------- twin ---

struct TwinOpts {
    std::string data, out, participant;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> twin_rng_seed;
    bool twin_noise_off = false;
    bool store_without_feedback = false;
    IblOverrides ibl;
};

void cmd_twin(const TwinOpts& opts) {
    const std::uint64_t seed = resolve_seed(opts.seed);
    const Dataset dataset = load_data_dir(opts.data);
    const auto records = dataset.judgements_of(opts.participant);
    if (records.empty())
        fail(ErrorKind::UnknownParticipant,
             "no judgements for participant '" + opts.participant + "'");

    IblParameters params = opts.ibl.apply(IblParameters{});
    params.rng_seed = opts.twin_rng_seed ? *opts.twin_rng_seed
                                         : derive_seed(seed, "twin/" + opts.participant);
    params.validate();
    TwinOptions twin_options;
    twin_options.noise_on = !opts.twin_noise_off;
    twin_options.store_without_feedback = opts.store_without_feedback;

    const TwinResult twin = twin_replay(records, dataset, params, twin_options);

    std::vector<SimilarityPoint> points;
    points.reserve(dataset.emails.size());
    for (std::size_t i = 0; i < dataset.emails.size(); ++i)
        points.push_back(
            ibis_point(dataset.emails[i].id, twin.memory, dataset.embeddings[i], params));

    ensure_out_dir(opts.out);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"trial_index", "email_id", "v_phishing", "v_ham", "predicted", "actual",
                    "utility", "stored", "matched"});
    for (const auto& t : twin.trace.trials)
        rows.push_back({std::to_string(t.trial_index), t.email_id, format_double(t.v_phishing),
                        format_double(t.v_ham), to_string(t.predicted), to_string(t.actual),
                        format_double(t.utility), t.stored ? "true" : "false",
                        t.matched ? "true" : "false"});
    const std::string trace_path = opts.out + "/twin_trace_" + opts.participant + ".csv";
    write_csv_file(trace_path, rows);
    const std::string points_path = opts.out + "/ibis_points_" + opts.participant + ".csv";
    write_points_csv({points}, points_path);

    json resolved = {{"subcommand", "twin"},
                     {"data", opts.data},
                     {"out", opts.out},
                     {"participant", opts.participant},
                     {"seed", seed},
                     {"twin_rng_seed", params.rng_seed},
                     {"ibl", ibl_to_json(params)},
                     {"twin_options",
                      {{"noise_on", twin_options.noise_on},
                       {"store_without_feedback", twin_options.store_without_feedback}}}};
    write_json_file(resolved, opts.out + "/twin_config_" + opts.participant + ".json");

    std::cout << "trials replayed: " << twin.trace.trials.size() << "\n"
              << "prediction accuracy: " << prediction_accuracy(twin.trace) << "\n"
              << trace_path << "\n"
              << points_path << "\n";
}

// ----------------------------------------------------------------- report ---

void cmd_report(const std::string& path) {
    const Report report = load_report_json(path);
    std::cout << render_report_table(report) << "participants evaluated: "
              << report.participants_evaluated << " of " << report.n_participants << "\n";
}

void add_ibl_flags(CLI::App* cmd, IblOverrides& ibl) {
    cmd->add_option("--decay", ibl.decay, "memory decay d");
    cmd->add_option("--mismatch-penalty", ibl.mismatch_penalty, "partial-match penalty mu");
    cmd->add_option("--attribute-weight", ibl.attribute_weight, "attribute weight omega");
    cmd->add_option("--noise-scale", ibl.noise_scale, "activation noise sigma");
    cmd->add_option("--temperature", ibl.temperature,
                    "softmax temperature (default sigma*sqrt(2))");
    cmd->add_option("--default-utility", ibl.default_utility,
                    "utility of the prepopulated instances");
    cmd->add_option("--noise-mode", ibl.noise_mode, "activation noise form")
        ->check(CLI::IsMember({"mean-zero", "literal-minus-one"}));
    cmd->add_option("--attribute-mode", ibl.attribute_mode, "partial matching form")
        ->check(CLI::IsMember({"composite", "per-dimension"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"instance-based subjective similarity toolkit"};
    app.require_subcommand(1);

    SynthOpts synth;
    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic cohort");
    c_synth->add_option("--out", synth.out, "output directory")->required();
    c_synth->add_option("--seed", synth.seed, "rng seed (default IBIS_SEED or 42)");
    c_synth->add_option("--per-category", synth.cohort.emails_per_category,
                        "emails per category");
    c_synth->add_option("--dim", synth.cohort.dimension, "embedding dimension");
    c_synth->add_option("--separation", synth.cohort.category_separation,
                        "distance between category means");
    c_synth->add_option("--noise", synth.cohort.embedding_noise, "embedding noise sd");
    c_synth->add_option("--participants", synth.cohort.participants, "number of agents");
    c_synth->add_option("--trials-pre", synth.cohort.trials_pre, "pre-training trials");
    c_synth->add_option("--trials-train", synth.cohort.trials_train, "feedback trials");
    c_synth->add_option("--trials-post", synth.cohort.trials_post, "post-training trials");
    c_synth->add_option("--decay-lo", synth.cohort.decay_range.lo, "agent decay lower bound");
    c_synth->add_option("--decay-hi", synth.cohort.decay_range.hi, "agent decay upper bound");
    c_synth->add_option("--sigma-lo", synth.cohort.sigma_range.lo, "agent noise lower bound");
    c_synth->add_option("--sigma-hi", synth.cohort.sigma_range.hi, "agent noise upper bound");

    std::string ingest_data;
    CLI::App* c_ingest = app.add_subcommand("ingest-check", "load and validate a dataset");
    c_ingest->add_option("--data", ingest_data, "dataset directory")->required();

    FitOpts fit;
    CLI::App* c_fit = app.add_subcommand("fit", "fit a learned similarity metric");
    c_fit->add_option("--data", fit.data, "dataset directory")->required();
    c_fit->add_option("--out", fit.out, "artifact output directory")->required();
    c_fit->add_option("--metric", fit.metric, "weighted | pruned | ensemble")
        ->required()
        ->check(CLI::IsMember({"weighted", "pruned", "ensemble"}));
    c_fit->add_option("--artifacts", fit.artifacts,
                      "directory holding weighted/pruned inputs for ensemble (default --out)");
    c_fit->add_option("--seed", fit.seed, "rng seed (default IBIS_SEED or 42)");
    c_fit->add_option("--k", fit.k, "dimensions kept by pruning (default 500/3072 of D)");
    c_fit->add_option("--lr", fit.fit.learning_rate, "gradient step size");
    c_fit->add_option("--epochs", fit.fit.epochs, "max gradient steps");
    c_fit->add_option("--tol", fit.fit.convergence_tol, "loss-delta convergence threshold");
    c_fit->add_option("--train-fraction", fit.fit.train_fraction,
                      "stratified train split fraction");
    c_fit->add_flag("--human-softmax", fit.human_softmax,
                    "softmax form of the human points instead of ratio");

    EvalOpts eval;
    CLI::App* c_eval = app.add_subcommand("eval", "score metrics against human judgements");
    c_eval->add_option("--data", eval.data, "dataset directory")->required();
    c_eval->add_option("--out", eval.out, "report output directory")->required();
    c_eval->add_option("--artifacts", eval.artifacts,
                       "directory holding fitted artifacts (default --data)");
    c_eval->add_option("--metrics", eval.metrics, "comma-separated metric list");
    c_eval->add_option("--seed", eval.seed, "rng seed (default IBIS_SEED or 42)");
    c_eval->add_option("--splits", eval.n_splits, "stratified splits for the regression column");
    c_eval->add_option("--split-train-fraction", eval.split_train_fraction,
                       "train fraction of each regression split");
    c_eval->add_option("--train-fraction", eval.train_fraction,
                       "prototype split train fraction");
    c_eval->add_option("--min-judgements", eval.min_judgements,
                       "judgements required to evaluate a participant");
    c_eval->add_option("--jobs", eval.jobs, "worker threads (0 = all cores)");
    c_eval->add_flag("--kde-fit-on-human", eval.kde_fit_on_human,
                     "fit the density on human points and evaluate metric points");
    c_eval->add_flag("--human-softmax", eval.human_softmax,
                     "softmax form of the human points instead of ratio");
    c_eval->add_flag("--twin-noise-off", eval.twin_noise_off, "replay twins without noise");
    c_eval->add_flag("--store-without-feedback", eval.store_without_feedback,
                     "twins store outcomes on every trial");
    add_ibl_flags(c_eval, eval.ibl);

    TwinOpts twin;
    CLI::App* c_twin = app.add_subcommand("twin", "replay one participant through the model");
    c_twin->add_option("--data", twin.data, "dataset directory")->required();
    c_twin->add_option("--out", twin.out, "output directory")->required();
    c_twin->add_option("--participant", twin.participant, "participant id")->required();
    c_twin->add_option("--seed", twin.seed, "rng seed (default IBIS_SEED or 42)");
    c_twin->add_option("--twin-rng-seed", twin.twin_rng_seed,
                       "exact rng stream for the twin (default derived from --seed)");
    c_twin->add_flag("--twin-noise-off", twin.twin_noise_off, "replay without noise");
    c_twin->add_flag("--store-without-feedback", twin.store_without_feedback,
                     "store outcomes on every trial");
    add_ibl_flags(c_twin, twin.ibl);

    std::string report_path;
    CLI::App* c_report = app.add_subcommand("report", "render a saved evaluation report");
    c_report->add_option("report", report_path, "path to report.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(c_synth)) cmd_synth(synth);
        else if (app.got_subcommand(c_ingest)) cmd_ingest_check(ingest_data);
        else if (app.got_subcommand(c_fit)) cmd_fit(fit);
        else if (app.got_subcommand(c_eval)) cmd_eval(eval);
        else if (app.got_subcommand(c_twin)) cmd_twin(twin);
        else if (app.got_subcommand(c_report)) cmd_report(report_path);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
