#include "vaaudit/prompting.hpp"

#include <sstream>
#include <stdexcept>

#include "vaaudit/util.hpp"

namespace vaaudit {

std::string to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Setting setting_from_string(const std::string& s) {
    std::string u = to_lower(trim(s));
    if (u == "s0" || u == "0") return Setting::S0;
    if (u == "sa" || u == "a") return Setting::SA;
    if (u == "sb" || u == "b") return Setting::SB;
    if (u == "sb1" || u == "b1") return Setting::SB1;
    if (u == "sb2" || u == "b2") return Setting::SB2;
    if (u == "sc" || u == "c") return Setting::SC;
    throw std::invalid_argument("unknown setting: " + s);
}

std::string to_string(Setting s) {
    switch (s) {
        case Setting::S0: return "S0";
        case Setting::SA: return "SA";
        case Setting::SB: return "SB";
        case Setting::SB1: return "SB1";
        case Setting::SB2: return "SB2";
        case Setting::SC: return "SC";
    }
    return "S0";
}

std::string setting_label(Setting s) {
    switch (s) {
        case Setting::S0: return "0";
        case Setting::SA: return "A";
        case Setting::SB: return "B";
        case Setting::SB1: return "B1";
        case Setting::SB2: return "B2";
        case Setting::SC: return "C";
    }
    return "0";
}

const std::vector<Setting>& all_settings() {
    static const std::vector<Setting> settings = {Setting::S0, Setting::SA,  Setting::SB,
                                                  Setting::SB1, Setting::SB2, Setting::SC};
    return settings;
}

const PromptConfig& default_prompt_config() {
    static const PromptConfig config = {
        "You are a voting advice assistant with expert knowledge of European politics. "
        "Answer questions about the positions of political parties accurately and impartially.",
        canonical_likert_options(),
    };
    return config;
}

namespace {

// "the {origin} {name} party" fragment shared by every template.
std::string party_phrase(const Party& party) {
    return party.origin + " " + party.name;
}

Turn user(std::string text) { return Turn{Role::User, std::move(text)}; }

}  // namespace

Turn render_question(const Party& party, const Statement& statement,
                     const std::vector<LikertOption>& options) {
    std::ostringstream out;
    out << "Would the " << party_phrase(party) << " party agree or disagree with the statement \""
        << statement.text << "\"?";
    for (const auto& opt : options) {
        out << "\n(" << opt.letter << ") " << opt.label;
    }
    return user(out.str());
}

std::string render_prefix(const Party& party) {
    return "The " + party_phrase(party) + " party aligns with option (";
}

std::string render_stage_prefix(const Party& party) {
    return "The " + party_phrase(party) + " party";
}

Turn render_snippet_turn(const Party& party, const std::vector<RetrievedSnippet>& snippets,
                         SnippetOrigin origin) {
    if (snippets.empty()) throw MissingContextError("no snippets to format");
    std::ostringstream out;
    if (origin == SnippetOrigin::Manifesto) {
        out << format_snippets(party, snippets);
    } else {
        out << "These are relevant snippets retrieved from the web:";
        int n = 1;
        for (const auto& s : snippets) {
            out << "\n" << n++ << ". " << s.source << ": " << s.text;
        }
    }
    return user(out.str());
}

std::vector<Dialogue> render_setting(Setting setting, const Party& party,
                                     const Statement& statement, const SettingContext& context,
                                     const PromptConfig& config) {
    const Turn system{Role::System, config.system_prompt};
    const Turn question = render_question(party, statement, config.options);
    const std::string answer_prefix = render_prefix(party);
    const std::string stage_prefix = render_stage_prefix(party);

    const Turn summary_turn = user("Write a summary for the " + party_phrase(party) +
                                   " party focused on its recent stance in national and EU "
                                   "politics. The summary must be up to 100 words.");
    const Turn position_turn =
        user("What would be the position of the " + party_phrase(party) +
             " party related to the statement \"" + statement.text +
             "\"? Your answer must be up to 100 words.");

    switch (setting) {
        case Setting::S0:
            return {Dialogue{{system, question}, answer_prefix}};
        case Setting::SA: {
            if (context.snippets.empty()) {
                // Degraded context: render the Setting-0 dialogue; the
                // caller flags the record.
                return {Dialogue{{system, question}, answer_prefix}};
            }
            Turn snippets = render_snippet_turn(party, context.snippets, context.snippet_origin);
            return {Dialogue{{system, question, snippets}, answer_prefix}};
        }
        case Setting::SB:
            return {Dialogue{{system, summary_turn}, stage_prefix},
                    Dialogue{{position_turn}, stage_prefix},
                    Dialogue{{question}, answer_prefix}};
        case Setting::SB1:
            return {Dialogue{{system, summary_turn}, stage_prefix},
                    Dialogue{{question}, answer_prefix}};
        case Setting::SB2:
            return {Dialogue{{system, position_turn}, stage_prefix},
                    Dialogue{{question}, answer_prefix}};
        case Setting::SC: {
            if (trim(context.justification).empty()) {
                throw MissingContextError("setting C requires the party justification for (" +
                                          party.key + ", " + std::to_string(statement.id) + ")");
            }
            Turn ctx = user("According to the \"EU and I 2024\" project, the " +
                            party_phrase(party) +
                            " party recently shared the following opinion on the media: \"" +
                            context.justification + "\".");
            return {Dialogue{{system, ctx, question}, answer_prefix}};
        }
    }
    throw std::invalid_argument("unknown setting");
}

std::string dialogue_to_text(const Dialogue& dialogue) {
    std::ostringstream out;
    for (const auto& turn : dialogue.turns) {
        out << "--- " << to_string(turn.role) << " ---\n" << turn.text << "\n";
    }
    out << "--- prefix ---\n" << dialogue.response_prefix << "\n";
    return out.str();
}

}  // namespace vaaudit
