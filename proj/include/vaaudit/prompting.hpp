#pragma once

#include <string>
#include <vector>

#include "vaaudit/dataset.hpp"
#include "vaaudit/retrieval.hpp"

namespace vaaudit {

enum class Role { System, User, Assistant };

std::string to_string(Role role);

struct Turn {
    Role role = Role::User;
    std::string text;

    bool operator==(const Turn&) const = default;
};

/// An ordered list of turns plus the partial assistant answer that is
/// prepended to the model's expected response to force option compliance.
struct Dialogue {
    std::vector<Turn> turns;
    std::string response_prefix;

    bool operator==(const Dialogue&) const = default;
};

/// The four auditing settings plus the two Setting-B ablations.
enum class Setting { S0, SA, SB, SB1, SB2, SC };

/// Parses "S0", "SA", "SB", "SB1", "SB2", "SC" (case-insensitive).
Setting setting_from_string(const std::string& s);
std::string to_string(Setting s);
/// Short column label used in report tables: 0, A, B, B1, B2, C.
std::string setting_label(Setting s);
const std::vector<Setting>& all_settings();

enum class SnippetOrigin { Manifesto, Web };

/// Per-item context consumed by render_setting. S0 needs nothing, SA the
/// retrieved snippets, SC the party's English justification.
struct SettingContext {
    std::vector<RetrievedSnippet> snippets;
    SnippetOrigin snippet_origin = SnippetOrigin::Web;
    std::string justification;
};

struct PromptConfig {
    std::string system_prompt;
    std::vector<LikertOption> options;
};

/// Default prompt configuration: neutral voting-advice system prompt and
/// the five canonical options.
const PromptConfig& default_prompt_config();

class MissingContextError : public std::runtime_error {
  public:
    explicit MissingContextError(const std::string& what) : std::runtime_error(what) {}
};

/// The final question turn: agree/disagree question followed by the
/// enumerated options (a)-(e). Pure; byte-identical across calls.
Turn render_question(const Party& party, const Statement& statement,
                     const std::vector<LikertOption>& options);

/// The forced answer prefix, `The {origin} {name} party aligns with option (`.
std::string render_prefix(const Party& party);

/// The shorter prefix used for the Setting-B preliminary stages.
std::string render_stage_prefix(const Party& party);

/// The user turn wrapping retrieved snippets, manifesto or web flavored.
Turn render_snippet_turn(const Party& party,
                         const std::vector<RetrievedSnippet>& snippets,
                         SnippetOrigin origin);

/// Renders a setting into its ordered dialogue stages.
///
/// Stages after the first carry only their own new turns; the staged
/// runner splices prior question-answer pairs into the history, so the
/// system prompt at the top of stage one is carried into every stage.
///
/// S0 and SC produce one stage, SB three, SB1/SB2 two. SA with an empty
/// snippet list degrades to the S0 dialogue (the caller flags the record).
/// SC with an empty justification throws MissingContextError.
std::vector<Dialogue> render_setting(Setting setting, const Party& party,
                                     const Statement& statement,
                                     const SettingContext& context,
                                     const PromptConfig& config = default_prompt_config());

/// Canonical plain-text dump used by golden-file tests: one `--- role ---`
/// section per turn followed by a `--- prefix ---` section.
std::string dialogue_to_text(const Dialogue& dialogue);

}  // namespace vaaudit
