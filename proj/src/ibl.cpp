#include "ibis/ibl.hpp"

#include <algorithm>
#include <stdexcept>

#include "ibis/errors.hpp"

namespace ibis {

void IblParameters::validate() const {
    if (!(decay >= 0.0)) fail(ErrorKind::BadConfig, "decay must be >= 0");
    if (!(mismatch_penalty >= 0.0)) fail(ErrorKind::BadConfig, "mismatch_penalty must be >= 0");
    if (!(attribute_weight >= 0.0)) fail(ErrorKind::BadConfig, "attribute_weight must be >= 0");
    if (!(noise_scale >= 0.0)) fail(ErrorKind::BadConfig, "noise_scale must be >= 0");
    if (!(tau() > 0.0))
        fail(ErrorKind::BadConfig,
             "temperature must be > 0; set it explicitly when noise_scale is 0");
    if (!(default_utility >= 0.0 && default_utility <= 1.0))
        fail(ErrorKind::BadConfig, "default_utility must be in [0, 1]");
}

std::vector<std::size_t> Memory::option_instances(Category option) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (instances[i].option == option) out.push_back(i);
    return out;
}

void Memory::store(const Embedding& embedding, Category option, double utility, long long tick) {
    for (auto& inst : instances) {
        if (inst.option == option && inst.utility == utility &&
            inst.embedding.values == embedding.values) {
            if (!inst.occurrences.empty() && tick <= inst.occurrences.back())
                throw std::logic_error("memory tick went backwards");
            inst.occurrences.push_back(tick);
            return;
        }
    }
    instances.push_back(Instance{embedding, option, utility, {tick}});
}

double attribute_similarity(const Embedding& x, const Embedding& y) {
    if (x.values.size() != y.values.size())
        fail(ErrorKind::DimensionMismatch,
             "cannot compare embeddings of dimension " + std::to_string(x.values.size()) +
                 " and " + std::to_string(y.values.size()));
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (std::size_t j = 0; j < x.values.size(); ++j) {
        dot += x.values[j] * y.values[j];
        nx += x.values[j] * x.values[j];
        ny += y.values[j] * y.values[j];
    }
    if (nx == 0.0 || ny == 0.0)
        fail(ErrorKind::ZeroVector, "cosine of an all-zero embedding is undefined");
    return (1.0 + dot / std::sqrt(nx * ny)) / 2.0;
}

namespace {

// mu * sum_j w_j (S_j - 1); <= 0, and 0 iff the query matches exactly
double partial_match_term(const Memory& memory, const Instance& inst, const Embedding& query,
                          const IblParameters& params) {
    if (params.attribute_mode == AttributeMode::CompositeCosine) {
        const double s = attribute_similarity(inst.embedding, query);
        return params.mismatch_penalty * params.attribute_weight * (s - 1.0);
    }
    const std::size_t dim = query.values.size();
    if (inst.embedding.values.size() != dim)
        fail(ErrorKind::DimensionMismatch, "instance and query dimensions differ");
    const double w = params.attribute_weight / static_cast<double>(dim);
    double sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        double a = inst.embedding.values[j];
        double b = query.values[j];
        if (!memory.context.empty()) {
            const double lo = memory.context.dim_min[j];
            const double hi = memory.context.dim_max[j];
            if (hi > lo) {
                a = (a - lo) / (hi - lo);
                b = (b - lo) / (hi - lo);
            } else {
                a = b = 0.0;
            }
        }
        const double s = 1.0 - std::min(std::abs(a - b), 1.0);
        sum += w * (s - 1.0);
    }
    return params.mismatch_penalty * sum;
}

} // namespace

double activation(const Memory& memory, std::size_t instance_index, const Embedding& query,
                  const IblParameters& params, bool noise_on, Rng& rng) {
    const Instance& inst = memory.instances.at(instance_index);
    if (inst.occurrences.empty())
        fail(ErrorKind::EmptyOccurrences, "instance has no occurrences");

    double recency = 0.0;
    for (long long t_prime : inst.occurrences) {
        if (t_prime >= memory.clock)
            throw std::logic_error("occurrence not earlier than the memory clock");
        recency += std::pow(static_cast<double>(memory.clock - t_prime), -params.decay);
    }

    double a = std::log(recency) + partial_match_term(memory, inst, query, params);
    if (noise_on) {
        const double xi = params.noise_mode == NoiseMode::MeanZero ? rng.normal()
                                                                   : rng.normal(-1.0, 1.0);
        a += params.noise_scale * xi;
    }
    return a;
}

std::vector<double> retrieval_probabilities(const Memory& memory, Category option,
                                            const Embedding& query, const IblParameters& params,
                                            bool noise_on, Rng& rng) {
    const auto idx = memory.option_instances(option);
    if (idx.empty())
        fail(ErrorKind::EmptyOption,
             std::string("no instances for option '") + to_string(option) + "'");

    std::vector<double> a(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        a[i] = activation(memory, idx[i], query, params, noise_on, rng);

    const double tau = params.tau();
    const double a_max = *std::max_element(a.begin(), a.end());
    std::vector<double> p(a.size());
    double z = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        p[i] = std::exp((a[i] - a_max) / tau);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

double blended_value(const Memory& memory, Category option, const Embedding& query,
                     const IblParameters& params, bool noise_on, Rng& rng) {
    const auto idx = memory.option_instances(option);
    const auto p = retrieval_probabilities(memory, option, query, params, noise_on, rng);
    double v = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) v += p[i] * memory.instances[idx[i]].utility;
    return v;
}

Embedding mean_embedding(const Dataset& dataset) {
    if (dataset.embeddings.empty()) fail(ErrorKind::EmptyGroup, "dataset has no embeddings");
    Embedding mean;
    mean.values.assign(dataset.dimension, 0.0);
    for (const auto& e : dataset.embeddings)
        for (std::size_t j = 0; j < dataset.dimension; ++j) mean.values[j] += e.values[j];
    bool all_zero = true;
    for (double& v : mean.values) {
        v /= static_cast<double>(dataset.embeddings.size());
        if (v != 0.0) all_zero = false;
    }
    if (all_zero)
        fail(ErrorKind::ZeroVector, "embedding centroid is the zero vector");
    return mean;
}

Memory prepopulated_memory(const Embedding& neutral, const IblParameters& params,
                           SimilarityContext context) {
    params.validate();
    Memory memory;
    memory.context = std::move(context);
    memory.instances.push_back(
        Instance{neutral, Category::Phishing, params.default_utility, {0}});
    memory.instances.push_back(Instance{neutral, Category::Ham, params.default_utility, {0}});
    memory.clock = 1;
    return memory;
}

SimilarityContext dimension_ranges(const Dataset& dataset) {
    SimilarityContext ctx;
    if (dataset.embeddings.empty()) return ctx;
    ctx.dim_min = dataset.embeddings[0].values;
    ctx.dim_max = dataset.embeddings[0].values;
    for (const auto& e : dataset.embeddings)
        for (std::size_t j = 0; j < e.values.size(); ++j) {
            ctx.dim_min[j] = std::min(ctx.dim_min[j], e.values[j]);
            ctx.dim_max[j] = std::max(ctx.dim_max[j], e.values[j]);
        }
    return ctx;
}

TwinResult twin_replay(const std::vector<JudgementRecord>& judgements, const Dataset& dataset,
                       const IblParameters& params, const TwinOptions& options) {
    if (judgements.empty()) fail(ErrorKind::NoJudgements, "cannot replay an empty sequence");
    params.validate();
    for (std::size_t i = 1; i < judgements.size(); ++i)
        if (judgements[i].trial_index <= judgements[i - 1].trial_index)
            fail(ErrorKind::UnsortedTrials,
                 "participant '" + judgements[i].participant_id +
                     "': trial_index not strictly increasing at trial " +
                     std::to_string(judgements[i].trial_index));

    SimilarityContext ctx;
    if (params.attribute_mode == AttributeMode::PerDimension) ctx = dimension_ranges(dataset);
    TwinResult result;
    result.memory = prepopulated_memory(mean_embedding(dataset), params, std::move(ctx));
    result.trace.participant_id = judgements.front().participant_id;
    result.trace.trials.reserve(judgements.size());

    Rng rng(params.rng_seed);
    Memory& memory = result.memory;
    for (const auto& j : judgements) {
        const Embedding& query = dataset.embedding_of(j.email_id);

        TwinTrialRecord rec;
        rec.trial_index = j.trial_index;
        rec.email_id = j.email_id;
        rec.v_phishing =
            blended_value(memory, Category::Phishing, query, params, options.noise_on, rng);
        rec.v_ham = blended_value(memory, Category::Ham, query, params, options.noise_on, rng);
        if (rec.v_phishing > rec.v_ham)
            rec.predicted = Category::Phishing;
        else if (rec.v_ham > rec.v_phishing)
            rec.predicted = Category::Ham;
        else
            rec.predicted = rng.bernoulli(0.5) ? Category::Phishing : Category::Ham;

        rec.actual = j.decision;
        rec.utility = j.correct ? 1.0 : 0.0;
        rec.matched = rec.predicted == rec.actual;
        rec.stored = j.feedback_shown || options.store_without_feedback;
        if (rec.stored) memory.store(query, j.decision, rec.utility, memory.clock);
        memory.clock += 1;

        result.trace.trials.push_back(std::move(rec));
    }
    return result;
}

} // namespace ibis
