#pragma once

#include <string>
#include <vector>

#include "ibis/types.hpp"

namespace ibis {

std::vector<EmailDoc> load_emails_jsonl(const std::string& path);
void write_emails_jsonl(const std::vector<EmailDoc>& emails, const std::string& path);

// Embeddings live in a small binary container: magic "IBIS", little-endian
// u32 count, u32 dimension, count*dimension float32 values row-major, then
// count newline-terminated email ids in row order. A CSV fallback with
// header id,v0,v1,... is accepted; the format is sniffed from the magic.
std::vector<Embedding> load_embeddings(const std::string& path);
void write_embeddings_binary(const std::vector<Embedding>& embeddings, const std::string& path);
void write_embeddings_csv(const std::vector<Embedding>& embeddings, const std::string& path);

std::vector<JudgementRecord> load_judgements_csv(const std::string& path);
void write_judgements_csv(const std::vector<JudgementRecord>& records, const std::string& path);

// Loads the three files and cross-validates them: embeddings and emails must
// pair up exactly, every embedding must have the common dimension, and every
// judgement must point at a known email. Judgement `confidence` is set to
// raw/scale_max and `correct` to (decision == email category).
Dataset load_dataset(const std::string& emails_path, const std::string& embeddings_path,
                     const std::string& judgements_path);
Dataset assemble_dataset(std::vector<EmailDoc> emails, std::vector<Embedding> embeddings,
                         std::vector<JudgementRecord> judgements);
void write_dataset(const Dataset& dataset, const std::string& emails_path,
                   const std::string& embeddings_path, const std::string& judgements_path);

enum class Grouping { PerParticipant, Global };

struct NormalizeResult {
    std::vector<JudgementRecord> records;
    std::vector<std::string> warnings;
};

// Min-max rescales confidence within each group and turns reaction time into
// speed = 1 - minmax(rt), so that 1 means the fastest response. A group whose
// values are all equal gets 1.0 everywhere plus a warning.
NormalizeResult normalize_judgements(const std::vector<JudgementRecord>& records,
                                     Grouping grouping);

} // namespace ibis
