#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vaaudit {

/// A single questionnaire statement. Ids are 1-based and unique.
struct Statement {
    int id = 0;
    std::string text;
    std::optional<std::string> topic;

    bool operator==(const Statement&) const = default;
};

/// One of the five answer options, ordered a (full disagreement) to
/// e (full agreement).
struct LikertOption {
    char letter = 0;
    std::string label;

    bool operator==(const LikertOption&) const = default;
};

/// The five canonical options, in order a..e.
const std::vector<LikertOption>& canonical_likert_options();

/// Looks up a canonical option by letter (case-insensitive).
std::optional<LikertOption> likert_option_from_letter(char letter);

struct Party {
    std::string key;
    std::string name;
    std::string origin;        // country adjective ("German") or "European"
    std::string country_code;  // EU, DE, FR, IT, ES
    std::optional<std::string> euro_party;
    std::optional<std::string> euro_group;

    bool operator==(const Party&) const = default;
};

/// Validating constructor used by loaders and tests. Throws
/// std::invalid_argument when key, name or origin is empty.
Party make_party(std::string key, std::string name, std::string origin,
                 std::string country_code,
                 std::optional<std::string> euro_party = std::nullopt,
                 std::optional<std::string> euro_group = std::nullopt);

struct PartyAnswer {
    std::string party;
    int statement_id = 0;
    LikertOption answer;
    std::string justification_original;
    std::string justification_language;  // language code: de, fr, it, es, en
    std::string justification_english;

    bool operator==(const PartyAnswer&) const = default;
};

/// Immutable after load; safe to share across concurrent audit workers.
struct Questionnaire {
    std::vector<Statement> statements;       // sorted by id
    std::vector<Party> parties;              // sorted by key
    std::vector<PartyAnswer> answers;        // sorted by (party, statement_id)

    const Statement* find_statement(int id) const;
    const Party* find_party(const std::string& key) const;
    const PartyAnswer* find_answer(const std::string& party, int statement_id) const;
    std::vector<const PartyAnswer*> answers_for(const std::string& party) const;

    bool operator==(const Questionnaire&) const = default;
};

/// A single validation finding. Issues are data, not failures.
struct Issue {
    std::string code;
    std::string detail;

    bool operator==(const Issue&) const = default;
};

/// Raised when a dataset directory cannot be loaded (missing file,
/// malformed record, dangling cross-reference). The message lists every
/// offender found, not just the first.
class DatasetError : public std::runtime_error {
  public:
    explicit DatasetError(const std::string& what) : std::runtime_error(what) {}
};

/// Loads `statements.jsonl`, `parties.jsonl` and `answers.jsonl` from a
/// dataset directory. Loading is order-independent: records are sorted
/// into canonical order, so two loads of byte-identical inputs (in any
/// line order) compare equal.
Questionnaire load_dataset(const std::filesystem::path& dir);

/// Writes the three jsonl files back out in canonical order. Reloading
/// the result yields a Questionnaire equal to the input.
void save_dataset(const Questionnaire& q, const std::filesystem::path& dir);

/// Checks every dataset invariant without mutating the input. Returns an
/// empty list iff all invariants hold and, when given, the statement
/// count matches.
std::vector<Issue> validate_dataset(const Questionnaire& q,
                                    std::optional<int> expect_statement_count = std::nullopt);

/// Maps a stored language code to the language name used in prompts
/// (de -> German). Unknown codes pass through unchanged.
std::string language_name_from_code(const std::string& code);

}  // namespace vaaudit
