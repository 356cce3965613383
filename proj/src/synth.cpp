#include "ibis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ibis/dataset_io.hpp"
#include "ibis/errors.hpp"
#include "ibis/fitting.hpp"
#include "ibis/rng.hpp"

namespace ibis {

using nlohmann::json;

namespace {

constexpr double kRtBaseMs = 800.0;
constexpr double kRtSpreadMs = 2200.0;
constexpr double kPhishingFlagRate = 0.5;
constexpr double kHamFlagRate = 0.05;
// attenuation of the shared offset on the clean dimensions; their higher
// per-dimension signal-to-noise is what ranking recovers, while the full-space
// cosine stays offset-dominated
constexpr double kSignalOffsetScale = 0.15;

std::string email_id_for(Category c, std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03zu", c == Category::Phishing ? "phish" : "ham", k);
    return buf;
}

std::string participant_id_for(std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%03zu", k);
    return buf;
}

double through_float(double v) { return static_cast<double>(static_cast<float>(v)); }

} // namespace

void CohortConfig::validate() const {
    if (emails_per_category < 1 || dimension < 1 || participants < 1)
        fail(ErrorKind::BadConfig, "counts must be >= 1");
    if (!(category_separation >= 0.0))
        fail(ErrorKind::BadConfig, "category_separation must be >= 0");
    if (!(embedding_noise > 0.0)) fail(ErrorKind::BadConfig, "embedding_noise must be > 0");
    if (!(decay_range.lo >= 0.0 && decay_range.hi >= decay_range.lo))
        fail(ErrorKind::BadConfig, "invalid decay_range");
    if (!(sigma_range.lo > 0.0 && sigma_range.hi >= sigma_range.lo))
        fail(ErrorKind::BadConfig,
             "sigma_range must be positive: temperature defaults to sigma*sqrt(2)");
    if (trials_total() < 1) fail(ErrorKind::BadConfig, "at least one trial per participant");
}

void generate_embeddings(const CohortConfig& config, std::vector<EmailDoc>& emails,
                         std::vector<Embedding>& embeddings) {
    config.validate();
    Rng rng(derive_seed(config.rng_seed, "embeddings"));
    const std::size_t dim = config.dimension;

    // category means = shared offset +- (separation/2) along a unit direction.
    // The direction has equal-magnitude random-sign loadings on every
    // dimension, so discrimination is spread across the whole space; the
    // offset is attenuated on a prune-mask-wide set of clean dimensions.
    // Full-space cosine stays offset-compressed while per-dimension ranking
    // can pick out the clean subspace, the regime LLM embeddings show.
    const std::size_t n_clean = std::min(dim, default_prune_k(dim));
    std::vector<std::size_t> order(dim);
    for (std::size_t j = 0; j < dim; ++j) order[j] = j;
    for (std::size_t j = dim; j > 1; --j)
        std::swap(order[j - 1], order[rng.below(j)]);
    std::vector<char> clean(dim, 0);
    for (std::size_t j = 0; j < n_clean; ++j) clean[order[j]] = 1;

    const double loading = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<double> direction(dim), offset(dim);
    for (std::size_t j = 0; j < dim; ++j)
        direction[j] = rng.bernoulli(0.5) ? loading : -loading;
    for (std::size_t j = 0; j < dim; ++j)
        offset[j] = rng.normal() * (clean[j] ? kSignalOffsetScale : 1.0);

    emails.clear();
    embeddings.clear();
    for (Category c : {Category::Phishing, Category::Ham}) {
        const double side = c == Category::Phishing ? 0.5 : -0.5;
        const double flag_rate = c == Category::Phishing ? kPhishingFlagRate : kHamFlagRate;
        for (std::size_t k = 0; k < config.emails_per_category; ++k) {
            EmailDoc email;
            email.id = email_id_for(c, k);
            email.category = c;
            email.author = rng.bernoulli(0.5) ? Author::HumanExpert : Author::LlmWritten;
            email.style = rng.bernoulli(0.5) ? Style::Plain : Style::LlmStyled;
            email.body = std::string("Synthetic ") + to_string(c) + " message " +
                         std::to_string(k) + " for benchmark runs.";
            for (std::size_t f = 0; f < SemanticFeatures::kCount; ++f)
                email.semantic.by_index(f) = rng.bernoulli(flag_rate);

            Embedding emb;
            emb.email_id = email.id;
            emb.values.resize(dim);
            for (std::size_t j = 0; j < dim; ++j)
                emb.values[j] = through_float(offset[j] +
                                              side * config.category_separation * direction[j] +
                                              config.embedding_noise * rng.normal());

            emails.push_back(std::move(email));
            embeddings.push_back(std::move(emb));
        }
    }
}

SimulatedParticipant simulate_participant(const IblParameters& agent_params,
                                          const std::string& participant_id,
                                          const std::vector<std::size_t>& email_sequence,
                                          const Dataset& emails_only,
                                          const CohortConfig& config) {
    agent_params.validate();
    SimulatedParticipant out;
    out.truth.participant_id = participant_id;
    out.truth.params = agent_params;

    Memory memory = prepopulated_memory(mean_embedding(emails_only), agent_params);
    Rng rng(agent_params.rng_seed);
    for (std::size_t i = 0; i < email_sequence.size(); ++i) {
        const std::size_t email_idx = email_sequence[i];
        const EmailDoc& email = emails_only.emails.at(email_idx);
        const Embedding& query = emails_only.embeddings.at(email_idx);

        const double v_phishing =
            blended_value(memory, Category::Phishing, query, agent_params, true, rng);
        const double v_ham =
            blended_value(memory, Category::Ham, query, agent_params, true, rng);
        Category choice;
        if (v_phishing > v_ham)
            choice = Category::Phishing;
        else if (v_ham > v_phishing)
            choice = Category::Ham;
        else
            choice = rng.bernoulli(0.5) ? Category::Phishing : Category::Ham;

        const Phase phase = i < config.trials_pre ? Phase::PreTrain
                            : i < config.trials_pre + config.trials_train ? Phase::Train
                                                                          : Phase::PostTrain;
        const bool feedback = phase == Phase::Train;
        const bool correct = choice == email.category;
        if (feedback) memory.store(query, choice, correct ? 1.0 : 0.0, memory.clock);
        memory.clock += 1;

        const double confidence = std::clamp(std::abs(v_phishing - v_ham), 0.0, 1.0);
        JudgementRecord j;
        j.participant_id = participant_id;
        j.trial_index = static_cast<long long>(i);
        j.email_id = email.id;
        j.phase = phase;
        j.decision = choice;
        j.confidence_raw = confidence;
        j.confidence_scale_max = 1.0;
        j.confidence = confidence;
        j.reaction_time_ms = kRtBaseMs + kRtSpreadMs * (1.0 - confidence);
        j.feedback_shown = feedback;
        j.correct = correct;

        out.records.push_back(std::move(j));
        out.truth.trial_values.push_back({v_phishing, v_ham});
    }
    return out;
}

Cohort generate_cohort(const CohortConfig& config) {
    config.validate();
    Cohort cohort;
    cohort.config = config;

    std::vector<EmailDoc> emails;
    std::vector<Embedding> embeddings;
    generate_embeddings(config, emails, embeddings);

    // emails-only view used while judgements are being produced
    Dataset stage = assemble_dataset(emails, embeddings, {});

    std::vector<JudgementRecord> all_records;
    for (std::size_t a = 0; a < config.participants; ++a) {
        const std::string pid = participant_id_for(a);

        Rng param_rng(derive_seed(config.rng_seed, pid + "/params"));
        IblParameters params;
        params.decay = param_rng.uniform(config.decay_range.lo, config.decay_range.hi);
        params.noise_scale = param_rng.uniform(config.sigma_range.lo, config.sigma_range.hi);
        params.rng_seed = derive_seed(config.rng_seed, pid + "/sim");

        Rng seq_rng(derive_seed(config.rng_seed, pid + "/sequence"));
        std::vector<std::size_t> sequence(config.trials_total());
        for (auto& s : sequence)
            s = static_cast<std::size_t>(seq_rng.below(stage.emails.size()));

        auto sim = simulate_participant(params, pid, sequence, stage, config);
        all_records.insert(all_records.end(), sim.records.begin(), sim.records.end());
        cohort.ground_truth.agents.push_back(std::move(sim.truth));
    }

    for (const auto& email : stage.emails)
        cohort.ground_truth.email_categories[email.id] = email.category;
    cohort.dataset = assemble_dataset(std::move(stage.emails), std::move(stage.embeddings),
                                      std::move(all_records));
    return cohort;
}

void write_cohort(const Cohort& cohort, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::IoFailure, "cannot create directory " + dir + ": " + ec.message());
    const std::filesystem::path base(dir);

    write_dataset(cohort.dataset, (base / "emails.jsonl").string(),
                  (base / "embeddings.bin").string(), (base / "judgements.csv").string());

    json agents = json::array();
    for (const auto& agent : cohort.ground_truth.agents) {
        json trial_values = json::array();
        for (const auto& v : agent.trial_values)
            trial_values.push_back(json::array({v[0], v[1]}));
        agents.push_back({{"participant_id", agent.participant_id},
                          {"decay", agent.params.decay},
                          {"mismatch_penalty", agent.params.mismatch_penalty},
                          {"attribute_weight", agent.params.attribute_weight},
                          {"noise_scale", agent.params.noise_scale},
                          {"temperature", agent.params.tau()},
                          {"default_utility", agent.params.default_utility},
                          {"rng_seed", agent.params.rng_seed},
                          {"trial_values", trial_values}});
    }
    json categories;
    for (const auto& [id, c] : cohort.ground_truth.email_categories)
        categories[id] = to_string(c);
    const auto& cfg = cohort.config;
    json config_echo = {{"emails_per_category", cfg.emails_per_category},
                        {"dimension", cfg.dimension},
                        {"category_separation", cfg.category_separation},
                        {"embedding_noise", cfg.embedding_noise},
                        {"participants", cfg.participants},
                        {"decay_range", json::array({cfg.decay_range.lo, cfg.decay_range.hi})},
                        {"sigma_range", json::array({cfg.sigma_range.lo, cfg.sigma_range.hi})},
                        {"trials_pre", cfg.trials_pre},
                        {"trials_train", cfg.trials_train},
                        {"trials_post", cfg.trials_post},
                        {"rng_seed", cfg.rng_seed}};

    std::ofstream out(base / "ground_truth.json", std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write ground_truth.json in " + dir);
    out << json{{"config", config_echo}, {"agents", agents}, {"email_categories", categories}}
               .dump(2)
        << '\n';
    if (!out) fail(ErrorKind::IoFailure, "short write to ground_truth.json in " + dir);
}

GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::MalformedRecord, path + ": invalid JSON: " + e.what());
    }

    GroundTruth truth;
    for (const auto& a : j.at("agents")) {
        AgentTruth agent;
        agent.participant_id = a.at("participant_id").get<std::string>();
        agent.params.decay = a.at("decay").get<double>();
        agent.params.mismatch_penalty = a.at("mismatch_penalty").get<double>();
        agent.params.attribute_weight = a.at("attribute_weight").get<double>();
        agent.params.noise_scale = a.at("noise_scale").get<double>();
        agent.params.temperature = a.at("temperature").get<double>();
        agent.params.default_utility = a.at("default_utility").get<double>();
        agent.params.rng_seed = a.at("rng_seed").get<std::uint64_t>();
        for (const auto& v : a.at("trial_values"))
            agent.trial_values.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        truth.agents.push_back(std::move(agent));
    }
    for (const auto& [id, c] : j.at("email_categories").items())
        truth.email_categories[id] = category_from_string(c.get<std::string>());
    return truth;
}

} // namespace ibis
