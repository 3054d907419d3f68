#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "text.hpp"

namespace lceval {

enum class Label { human, machine, unknown };

std::string label_name(Label label);
Label label_from_name(const std::string& name);

// One sentence, optionally with a supplied tokenization and dependency
// parse (1-based head indices, 0 = root). The artifact never runs a
// parser; parses arrive in-record or through a sidecar file.
struct Caption {
    std::string text;
    std::optional<TokenSeq> tokens;
    std::optional<std::vector<int>> heads;

    // Supplied tokens win over re-tokenization so they stay aligned with
    // the parse; otherwise the shared tokenizer is applied.
    TokenSeq token_seq() const;
    bool has_parse() const { return tokens.has_value() && heads.has_value(); }
};

struct CandidateRecord {
    std::string image_id;
    Caption candidate;
    std::vector<Caption> references;
    Label label = Label::unknown;
    std::optional<double> human_score;
    std::optional<std::string> system_id;
    std::map<std::string, double> external_scores;
};

struct PairingPolicy {
    enum class Mode { explicit_refs, leave_out };
    Mode mode = Mode::leave_out;
    int refs_per_candidate = 4;
    uint64_t rng_seed = 0;
};

// JSON Lines, one record per line. Malformed lines raise input_error
// naming the line number and offending field.
std::vector<CandidateRecord> load_records(const std::string& path);
void save_records(const std::vector<CandidateRecord>& records, const std::string& path);

std::vector<CandidateRecord> parse_record_lines(const std::vector<std::string>& lines,
                                                const std::string& source_name);
std::string record_to_json_line(const CandidateRecord& rec);

struct MachineCaption {
    Caption caption;
    std::optional<std::string> system_id;
};

// The leave-out pairing scheme: every image carries exactly five human
// captions; as many humans as there are machine captions are picked as
// candidates (each keeping the other four humans as references), and each
// machine caption draws a seeded subset of the humans as references.
std::vector<CandidateRecord> pair_leave_out(const std::string& image_id,
                                            const std::vector<Caption>& human_captions,
                                            const std::vector<MachineCaption>& machine_captions,
                                            const PairingPolicy& policy);

// Keeps human-labeled records plus machine records whose system id is in
// the set. Everything else (including unknown-labeled records) is dropped.
std::vector<CandidateRecord> filter_by_system(const std::vector<CandidateRecord>& records,
                                              const std::vector<std::string>& system_ids);

}  // namespace lceval
