#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "ibis/errors.hpp"

namespace ibis {

enum class Category { Phishing, Ham };
enum class Author { HumanExpert, LlmWritten };
enum class Style { Plain, LlmStyled };
enum class Phase { PreTrain, Train, PostTrain };

const char* to_string(Category c);
const char* to_string(Author a);
const char* to_string(Style s);
const char* to_string(Phase p);

Category category_from_string(const std::string& s);
Author author_from_string(const std::string& s);
Style style_from_string(const std::string& s);
Phase phase_from_string(const std::string& s);

inline Category other(Category c) {
    return c == Category::Phishing ? Category::Ham : Category::Phishing;
}

// Expert-coded boolean cues. Order is fixed; it defines the semantic
// feature vector layout everywhere.
struct SemanticFeatures {
    bool link_mismatch = false;
    bool offer = false;
    bool urgent = false;
    bool subject_suspicious = false;
    bool request_credentials = false;
    bool sender_mismatch = false;

    static constexpr std::size_t kCount = 6;

    std::array<double, kCount> as_vector() const {
        return {link_mismatch ? 1.0 : 0.0,       offer ? 1.0 : 0.0,
                urgent ? 1.0 : 0.0,              subject_suspicious ? 1.0 : 0.0,
                request_credentials ? 1.0 : 0.0, sender_mismatch ? 1.0 : 0.0};
    }

    bool& by_index(std::size_t i);
    bool operator==(const SemanticFeatures&) const = default;
};

inline constexpr std::array<const char*, SemanticFeatures::kCount> kSemanticFeatureNames = {
    "link_mismatch", "offer", "urgent", "subject_suspicious", "request_credentials",
    "sender_mismatch"};

struct EmailDoc {
    std::string id;
    std::string body;
    Category category = Category::Ham;
    Author author = Author::HumanExpert;
    Style style = Style::Plain;
    SemanticFeatures semantic;

    bool operator==(const EmailDoc&) const = default;
};

struct Embedding {
    std::string email_id;
    std::vector<double> values;

    bool operator==(const Embedding&) const = default;
};

struct JudgementRecord {
    std::string participant_id;
    long long trial_index = 0;
    std::string email_id;
    Phase phase = Phase::PreTrain;
    Category decision = Category::Ham;
    double confidence_raw = 0.0;
    double confidence_scale_max = 1.0;
    double confidence = 0.0;      // raw / scale_max at load; group-normalized later
    double reaction_time_ms = 0.0;
    double speed = -1.0;          // -1 until normalize_judgements fills it
    bool feedback_shown = false;
    bool correct = false;         // decision == email category, set at load

    bool operator==(const JudgementRecord&) const = default;
};

// Emails, their embeddings (parallel by index) and the behavioral log,
// cross-validated: every email has an embedding of the common dimension and
// every judgement refers to a known email.
struct Dataset {
    std::vector<EmailDoc> emails;
    std::vector<Embedding> embeddings; // embeddings[i].email_id == emails[i].id
    std::vector<JudgementRecord> judgements;
    std::size_t dimension = 0;

    void rebuild_index();
    std::size_t index_of(const std::string& email_id) const;
    const EmailDoc& email_of(const std::string& email_id) const;
    const Embedding& embedding_of(const std::string& email_id) const;

    std::vector<std::string> participant_ids() const; // unique, in first-appearance order
    std::vector<JudgementRecord> judgements_of(const std::string& participant_id) const;

private:
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace ibis
