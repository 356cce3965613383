#include "ibis/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ibis/csv.hpp"
#include "ibis/errors.hpp"

namespace ibis {

using nlohmann::json;

// ---------------------------------------------------------------- emails ---

std::vector<EmailDoc> load_emails_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);

    std::vector<EmailDoc> emails;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (!obj.is_object())
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(line_no) + ": expected a JSON object");

        EmailDoc email;
        try {
            email.id = obj.at("id").get<std::string>();
            email.body = obj.at("body").get<std::string>();
            email.category = category_from_string(obj.at("category").get<std::string>());
            if (obj.contains("author"))
                email.author = author_from_string(obj["author"].get<std::string>());
            if (obj.contains("style"))
                email.style = style_from_string(obj["style"].get<std::string>());
            if (obj.contains("semantic")) {
                const json& sem = obj["semantic"];
                if (!sem.is_object())
                    fail(ErrorKind::MalformedRecord, "semantic must be an object");
                for (std::size_t i = 0; i < SemanticFeatures::kCount; ++i)
                    if (sem.contains(kSemanticFeatureNames[i]))
                        email.semantic.by_index(i) =
                            sem[kSemanticFeatureNames[i]].get<bool>();
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(line_no) + ": " + e.what());
        }
        if (email.id.empty())
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(line_no) + ": empty email id");
        emails.push_back(std::move(email));
    }
    return emails;
}

void write_emails_jsonl(const std::vector<EmailDoc>& emails, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path);
    for (const auto& email : emails) {
        json sem;
        auto v = email.semantic.as_vector();
        for (std::size_t i = 0; i < SemanticFeatures::kCount; ++i)
            sem[kSemanticFeatureNames[i]] = v[i] != 0.0;
        json obj = {{"id", email.id},
                    {"body", email.body},
                    {"category", to_string(email.category)},
                    {"author", to_string(email.author)},
                    {"style", to_string(email.style)},
                    {"semantic", sem}};
        out << obj.dump() << '\n';
    }
    if (!out) fail(ErrorKind::IoFailure, "short write to " + path);
}

// ------------------------------------------------------------ embeddings ---

namespace {

constexpr char kMagic[4] = {'I', 'B', 'I', 'S'};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<Embedding> load_embeddings_binary(const std::string& path,
                                              const std::string& content) {
    const auto* data = reinterpret_cast<const unsigned char*>(content.data());
    const std::size_t size = content.size();
    if (size < 12) fail(ErrorKind::MalformedRecord, path + ": truncated header");

    const std::uint32_t count = get_u32(data + 4);
    const std::uint32_t dim = get_u32(data + 8);
    if (dim == 0) fail(ErrorKind::MalformedRecord, path + ": zero dimension");

    const std::size_t values_bytes = std::size_t(count) * dim * 4;
    if (size < 12 + values_bytes)
        fail(ErrorKind::MalformedRecord, path + ": truncated value block");

    std::vector<Embedding> embeddings(count);
    std::size_t offset = 12;
    for (std::uint32_t r = 0; r < count; ++r) {
        embeddings[r].values.resize(dim);
        for (std::uint32_t c = 0; c < dim; ++c) {
            const std::uint32_t bits = get_u32(data + offset);
            offset += 4;
            const float f = std::bit_cast<float>(bits);
            if (!std::isfinite(f))
                fail(ErrorKind::MalformedRecord,
                     path + ": non-finite value in row " + std::to_string(r));
            embeddings[r].values[c] = static_cast<double>(f);
        }
    }

    for (std::uint32_t r = 0; r < count; ++r) {
        std::size_t end = offset;
        while (end < size && content[end] != '\n') ++end;
        if (end >= size)
            fail(ErrorKind::MalformedRecord, path + ": missing id for row " + std::to_string(r));
        embeddings[r].email_id = content.substr(offset, end - offset);
        if (embeddings[r].email_id.empty())
            fail(ErrorKind::MalformedRecord, path + ": empty id for row " + std::to_string(r));
        offset = end + 1;
    }
    if (offset != size)
        fail(ErrorKind::MalformedRecord, path + ": trailing bytes after id block");
    return embeddings;
}

std::vector<Embedding> load_embeddings_csv(const std::string& path, const std::string& content) {
    std::istringstream in(content);
    auto rows = parse_csv(in, path);
    if (rows.empty()) fail(ErrorKind::MalformedRecord, path + ": empty embeddings file");

    const auto& header = rows[0].fields;
    if (header.empty() || header[0] != "id")
        fail(ErrorKind::MalformedRecord, path + ": first header column must be 'id'");
    const std::size_t dim = header.size() - 1;
    if (dim == 0) fail(ErrorKind::MalformedRecord, path + ": no value columns");
    for (std::size_t c = 0; c < dim; ++c)
        if (header[c + 1] != "v" + std::to_string(c))
            fail(ErrorKind::MalformedRecord,
                 path + ": header column " + std::to_string(c + 1) + " must be v" +
                     std::to_string(c));

    std::vector<Embedding> embeddings;
    embeddings.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != dim + 1)
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(row.line) + ": expected " +
                     std::to_string(dim + 1) + " fields, got " +
                     std::to_string(row.fields.size()));
        Embedding e;
        e.email_id = row.fields[0];
        if (e.email_id.empty())
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(row.line) + ": empty id");
        e.values.resize(dim);
        for (std::size_t c = 0; c < dim; ++c) {
            e.values[c] =
                parse_double_field(row.fields[c + 1], "v" + std::to_string(c), row.line);
            if (!std::isfinite(e.values[c]))
                fail(ErrorKind::MalformedRecord,
                     path + " line " + std::to_string(row.line) + ": non-finite value");
        }
        embeddings.push_back(std::move(e));
    }
    return embeddings;
}

} // namespace

std::vector<Embedding> load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoFailure, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    if (content.size() >= 4 && std::memcmp(content.data(), kMagic, 4) == 0)
        return load_embeddings_binary(path, content);
    return load_embeddings_csv(path, content);
}

void write_embeddings_binary(const std::vector<Embedding>& embeddings, const std::string& path) {
    const std::size_t dim = embeddings.empty() ? 0 : embeddings[0].values.size();
    for (const auto& e : embeddings)
        if (e.values.size() != dim)
            fail(ErrorKind::DimensionMismatch,
                 "embedding '" + e.email_id + "' has dimension " +
                     std::to_string(e.values.size()) + ", expected " + std::to_string(dim));

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(embeddings.size()));
    put_u32(out, static_cast<std::uint32_t>(dim));
    for (const auto& e : embeddings)
        for (double v : e.values)
            put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    for (const auto& e : embeddings) {
        out += e.email_id;
        out.push_back('\n');
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::IoFailure, "cannot write " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) fail(ErrorKind::IoFailure, "short write to " + path);
}

void write_embeddings_csv(const std::vector<Embedding>& embeddings, const std::string& path) {
    const std::size_t dim = embeddings.empty() ? 0 : embeddings[0].values.size();
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"id"};
    for (std::size_t c = 0; c < dim; ++c) header.push_back("v" + std::to_string(c));
    rows.push_back(std::move(header));
    for (const auto& e : embeddings) {
        std::vector<std::string> row{e.email_id};
        for (double v : e.values) row.push_back(format_double(v));
        rows.push_back(std::move(row));
    }
    write_csv_file(path, rows);
}

// ------------------------------------------------------------ judgements ---

namespace {

const std::vector<std::string> kJudgementHeader = {
    "participant_id", "trial_index",          "email_id",
    "phase",          "decision",             "confidence_raw",
    "confidence_scale_max", "reaction_time_ms", "feedback_shown"};

bool parse_bool_field(const std::string& text, const std::string& what, std::size_t line) {
    if (text == "true") return true;
    if (text == "false") return false;
    fail(ErrorKind::MalformedRecord, "line " + std::to_string(line) + ": field '" + what +
                                         "' must be true or false, got '" + text + "'");
}

} // namespace

std::vector<JudgementRecord> load_judgements_csv(const std::string& path) {
    auto rows = parse_csv_file(path);
    if (rows.empty()) fail(ErrorKind::MalformedRecord, path + ": empty judgements file");
    if (rows[0].fields != kJudgementHeader)
        fail(ErrorKind::MalformedRecord, path + ": unexpected header");

    std::vector<JudgementRecord> records;
    records.reserve(rows.size() - 1);
    std::unordered_map<std::string, long long> last_trial;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t ln = row.line;
        if (row.fields.size() != kJudgementHeader.size())
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": expected " +
                     std::to_string(kJudgementHeader.size()) + " fields, got " +
                     std::to_string(row.fields.size()));

        JudgementRecord j;
        j.participant_id = row.fields[0];
        if (j.participant_id.empty())
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": empty participant_id");
        j.trial_index = parse_int_field(row.fields[1], "trial_index", ln);
        if (j.trial_index < 0)
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": negative trial_index");
        j.email_id = row.fields[2];
        if (j.email_id.empty())
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": empty email_id");
        try {
            j.phase = phase_from_string(row.fields[3]);
            j.decision = category_from_string(row.fields[4]);
        } catch (const Error& e) {
            fail(ErrorKind::MalformedRecord, path + " line " + std::to_string(ln) + ": " +
                                                 e.what());
        }
        j.confidence_raw = parse_double_field(row.fields[5], "confidence_raw", ln);
        j.confidence_scale_max = parse_double_field(row.fields[6], "confidence_scale_max", ln);
        j.reaction_time_ms = parse_double_field(row.fields[7], "reaction_time_ms", ln);
        j.feedback_shown = parse_bool_field(row.fields[8], "feedback_shown", ln);

        if (!(j.confidence_scale_max > 0.0))
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": confidence_scale_max must be > 0");
        if (j.confidence_raw < 0.0 || j.confidence_raw > j.confidence_scale_max)
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) +
                     ": confidence_raw outside [0, confidence_scale_max]");
        if (!(j.reaction_time_ms > 0.0))
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": reaction_time_ms must be > 0");
        j.confidence = j.confidence_raw / j.confidence_scale_max;

        auto it = last_trial.find(j.participant_id);
        if (it != last_trial.end() && j.trial_index <= it->second)
            fail(ErrorKind::MalformedRecord,
                 path + " line " + std::to_string(ln) + ": trial_index not strictly increasing "
                                                        "for participant '" +
                     j.participant_id + "'");
        last_trial[j.participant_id] = j.trial_index;

        records.push_back(std::move(j));
    }
    return records;
}

void write_judgements_csv(const std::vector<JudgementRecord>& records, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back(kJudgementHeader);
    for (const auto& j : records)
        rows.push_back({j.participant_id, std::to_string(j.trial_index), j.email_id,
                        to_string(j.phase), to_string(j.decision),
                        format_double(j.confidence_raw), format_double(j.confidence_scale_max),
                        format_double(j.reaction_time_ms), j.feedback_shown ? "true" : "false"});
    write_csv_file(path, rows);
}

// --------------------------------------------------------------- dataset ---

Dataset assemble_dataset(std::vector<EmailDoc> emails, std::vector<Embedding> embeddings,
                         std::vector<JudgementRecord> judgements) {
    if (emails.empty()) fail(ErrorKind::EmptyGroup, "dataset has no emails");

    std::unordered_set<std::string> ids;
    for (const auto& e : emails)
        if (!ids.insert(e.id).second)
            fail(ErrorKind::MalformedRecord, "duplicate email id '" + e.id + "'");

    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (!ids.count(embeddings[i].email_id))
            fail(ErrorKind::MalformedRecord,
                 "embedding for unknown email id '" + embeddings[i].email_id + "'");
        if (!by_id.emplace(embeddings[i].email_id, i).second)
            fail(ErrorKind::MalformedRecord,
                 "duplicate embedding for email id '" + embeddings[i].email_id + "'");
    }

    Dataset ds;
    ds.emails = std::move(emails);
    ds.embeddings.resize(ds.emails.size());
    for (std::size_t i = 0; i < ds.emails.size(); ++i) {
        auto it = by_id.find(ds.emails[i].id);
        if (it == by_id.end())
            fail(ErrorKind::MissingEmbedding, "email '" + ds.emails[i].id + "' has no embedding");
        ds.embeddings[i] = std::move(embeddings[it->second]);
    }

    ds.dimension = ds.embeddings[0].values.size();
    if (ds.dimension == 0) fail(ErrorKind::DimensionMismatch, "embeddings have dimension 0");
    for (const auto& e : ds.embeddings)
        if (e.values.size() != ds.dimension)
            fail(ErrorKind::DimensionMismatch,
                 "embedding '" + e.email_id + "' has dimension " +
                     std::to_string(e.values.size()) + ", expected " +
                     std::to_string(ds.dimension));

    ds.rebuild_index();
    for (auto& j : judgements) {
        if (!ids.count(j.email_id))
            fail(ErrorKind::DanglingJudgement,
                 "judgement for participant '" + j.participant_id + "' trial " +
                     std::to_string(j.trial_index) + " references unknown email '" + j.email_id +
                     "'");
        j.correct = j.decision == ds.email_of(j.email_id).category;
        if (!(j.confidence_scale_max > 0.0))
            fail(ErrorKind::MalformedRecord,
                 "judgement for participant '" + j.participant_id + "' trial " +
                     std::to_string(j.trial_index) + ": confidence_scale_max must be > 0");
        j.confidence = j.confidence_raw / j.confidence_scale_max;
    }
    ds.judgements = std::move(judgements);
    return ds;
}

Dataset load_dataset(const std::string& emails_path, const std::string& embeddings_path,
                     const std::string& judgements_path) {
    return assemble_dataset(load_emails_jsonl(emails_path), load_embeddings(embeddings_path),
                            load_judgements_csv(judgements_path));
}

void write_dataset(const Dataset& dataset, const std::string& emails_path,
                   const std::string& embeddings_path, const std::string& judgements_path) {
    write_emails_jsonl(dataset.emails, emails_path);
    write_embeddings_binary(dataset.embeddings, embeddings_path);
    write_judgements_csv(dataset.judgements, judgements_path);
}

// --------------------------------------------------------- normalization ---

namespace {

struct Range {
    double lo = 0.0, hi = 0.0;
    bool degenerate() const { return hi <= lo; }
    double rescale(double v) const { return degenerate() ? 1.0 : (v - lo) / (hi - lo); }
};

Range range_of(const std::vector<double>& values) {
    Range r{values.front(), values.front()};
    for (double v : values) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

} // namespace

NormalizeResult normalize_judgements(const std::vector<JudgementRecord>& records,
                                     Grouping grouping) {
    if (records.empty()) fail(ErrorKind::EmptyGroup, "no judgements to normalize");

    // group key "" means the whole dataset
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i)
        groups[grouping == Grouping::PerParticipant ? records[i].participant_id : std::string()]
            .push_back(i);

    NormalizeResult result;
    result.records = records;
    for (const auto& [key, idx] : groups) {
        std::vector<double> conf, rt;
        conf.reserve(idx.size());
        rt.reserve(idx.size());
        for (std::size_t i : idx) {
            conf.push_back(records[i].confidence);
            rt.push_back(records[i].reaction_time_ms);
        }
        const Range conf_range = range_of(conf);
        const Range rt_range = range_of(rt);
        const std::string group_name = key.empty() ? "all records" : "participant '" + key + "'";
        if (conf_range.degenerate())
            result.warnings.push_back("constant confidence for " + group_name +
                                      "; normalized to 1");
        if (rt_range.degenerate())
            result.warnings.push_back("constant reaction time for " + group_name +
                                      "; speed normalized to 1");
        for (std::size_t i : idx) {
            auto& j = result.records[i];
            j.confidence = conf_range.rescale(j.confidence);
            j.speed = rt_range.degenerate() ? 1.0 : 1.0 - rt_range.rescale(j.reaction_time_ms);
        }
    }
    return result;
}

} // namespace ibis
