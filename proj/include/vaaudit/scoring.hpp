#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vaaudit/dataset.hpp"
#include "vaaudit/prompting.hpp"

namespace vaaudit {

enum class Stance { Agree, Disagree, Neutral };

std::string to_string(Stance stance);

/// Collapses the five options into the two stance groups: a, b disagree;
/// d, e agree; c neutral.
Stance binarize(const LikertOption& option);

/// One (party, statement, setting) outcome.
///
/// `matched` is present iff the item is scorable: the party stance is not
/// neutral and a completion was obtained. Unparsed completions score
/// matched = false (compliance failure is a model failure); transport
/// errors leave matched absent.
struct AuditRecord {
    std::string party;
    int statement_id = 0;
    Setting setting = Setting::S0;
    std::string raw_response;
    std::optional<LikertOption> parsed_option;
    std::optional<Stance> model_stance;
    Stance party_stance = Stance::Neutral;
    std::optional<bool> matched;
    bool degraded_context = false;
    std::optional<std::string> error;
    std::optional<std::string> exclusion_reason;

    bool operator==(const AuditRecord&) const = default;
};

/// Scans the completion for the first parenthesized option `(a)`-`(e)` at
/// or after the position where the prefix occurs; if the prefix is absent
/// the first such pattern anywhere wins. Letter matching is
/// case-insensitive. Returns nullopt when no pattern is found.
std::optional<LikertOption> parse_option(const std::string& raw, const std::string& prefix);

/// Neutral handling knobs. Defaults follow the two-group protocol:
/// party-neutral statements leave the denominator, model-neutral answers
/// against a non-neutral party count as mismatches.
struct ScoringPolicy {
    bool exclude_party_neutral = true;
    bool model_neutral_is_mismatch = true;
};

/// Fills model_stance, matched and exclusion_reason from parsed_option
/// and party_stance. Idempotent.
AuditRecord score_record(AuditRecord record, const ScoringPolicy& policy = {});

class UndefinedAccuracyError : public std::runtime_error {
  public:
    explicit UndefinedAccuracyError(const std::string& what) : std::runtime_error(what) {}
};

/// count(matched = true) / count(matched present). Throws
/// UndefinedAccuracyError when no record is scorable.
double accuracy(const std::vector<AuditRecord>& records);

/// Line-delimited serialization for resumable runs and external analysis.
std::string record_to_jsonl(const AuditRecord& record);
AuditRecord record_from_jsonl(const std::string& line);

std::vector<AuditRecord> load_records(const std::filesystem::path& path);

}  // namespace vaaudit
