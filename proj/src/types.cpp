#include "ibis/types.hpp"

#include <algorithm>

namespace ibis {

const char* to_string(Category c) {
    return c == Category::Phishing ? "phishing" : "ham";
}

const char* to_string(Author a) {
    return a == Author::HumanExpert ? "human_expert" : "llm_written";
}

const char* to_string(Style s) {
    return s == Style::Plain ? "plain" : "llm_styled";
}

const char* to_string(Phase p) {
    switch (p) {
        case Phase::PreTrain: return "pre_train";
        case Phase::Train: return "train";
        case Phase::PostTrain: return "post_train";
    }
    return "pre_train";
}

Category category_from_string(const std::string& s) {
    if (s == "phishing") return Category::Phishing;
    if (s == "ham") return Category::Ham;
    fail(ErrorKind::MalformedRecord, "unknown category '" + s + "'");
}

Author author_from_string(const std::string& s) {
    if (s == "human_expert") return Author::HumanExpert;
    if (s == "llm_written") return Author::LlmWritten;
    fail(ErrorKind::MalformedRecord, "unknown author '" + s + "'");
}

Style style_from_string(const std::string& s) {
    if (s == "plain") return Style::Plain;
    if (s == "llm_styled") return Style::LlmStyled;
    fail(ErrorKind::MalformedRecord, "unknown style '" + s + "'");
}

Phase phase_from_string(const std::string& s) {
    if (s == "pre_train") return Phase::PreTrain;
    if (s == "train") return Phase::Train;
    if (s == "post_train") return Phase::PostTrain;
    fail(ErrorKind::MalformedRecord, "unknown phase '" + s + "'");
}

bool& SemanticFeatures::by_index(std::size_t i) {
    switch (i) {
        case 0: return link_mismatch;
        case 1: return offer;
        case 2: return urgent;
        case 3: return subject_suspicious;
        case 4: return request_credentials;
    }
    return sender_mismatch;
}

void Dataset::rebuild_index() {
    index_.clear();
    index_.reserve(emails.size());
    for (std::size_t i = 0; i < emails.size(); ++i) index_[emails[i].id] = i;
}

std::size_t Dataset::index_of(const std::string& email_id) const {
    auto it = index_.find(email_id);
    if (it == index_.end())
        fail(ErrorKind::DanglingJudgement, "unknown email id '" + email_id + "'");
    return it->second;
}

const EmailDoc& Dataset::email_of(const std::string& email_id) const {
    return emails[index_of(email_id)];
}

const Embedding& Dataset::embedding_of(const std::string& email_id) const {
    return embeddings[index_of(email_id)];
}

std::vector<std::string> Dataset::participant_ids() const {
    std::vector<std::string> ids;
    for (const auto& j : judgements)
        if (std::find(ids.begin(), ids.end(), j.participant_id) == ids.end())
            ids.push_back(j.participant_id);
    return ids;
}

std::vector<JudgementRecord> Dataset::judgements_of(const std::string& participant_id) const {
    std::vector<JudgementRecord> out;
    for (const auto& j : judgements)
        if (j.participant_id == participant_id) out.push_back(j);
    return out;
}

} // namespace ibis
