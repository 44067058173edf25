#include "vaaudit/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vaaudit/util.hpp"

namespace vaaudit {

using nlohmann::json;

const std::vector<LikertOption>& canonical_likert_options() {
    static const std::vector<LikertOption> options = {
        {'a', "Completely disagree"}, {'b', "Tend to disagree"}, {'c', "Neutral"},
        {'d', "Tend to agree"},       {'e', "Completely agree"},
    };
    return options;
}

std::optional<LikertOption> likert_option_from_letter(char letter) {
    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(letter)));
    for (const auto& opt : canonical_likert_options()) {
        if (opt.letter == l) return opt;
    }
    return std::nullopt;
}

Party make_party(std::string key, std::string name, std::string origin,
                 std::string country_code, std::optional<std::string> euro_party,
                 std::optional<std::string> euro_group) {
    if (trim(key).empty()) throw std::invalid_argument("party key must be non-empty");
    if (trim(name).empty()) throw std::invalid_argument("party name must be non-empty");
    if (trim(origin).empty())
        throw std::invalid_argument("party origin must be non-empty (party " + key + ")");
    return Party{std::move(key), std::move(name),       std::move(origin),
                 std::move(country_code), std::move(euro_party), std::move(euro_group)};
}

const Statement* Questionnaire::find_statement(int id) const {
    auto it = std::lower_bound(statements.begin(), statements.end(), id,
                               [](const Statement& s, int v) { return s.id < v; });
    if (it != statements.end() && it->id == id) return &*it;
    return nullptr;
}

const Party* Questionnaire::find_party(const std::string& key) const {
    auto it = std::lower_bound(parties.begin(), parties.end(), key,
                               [](const Party& p, const std::string& v) { return p.key < v; });
    if (it != parties.end() && it->key == key) return &*it;
    return nullptr;
}

const PartyAnswer* Questionnaire::find_answer(const std::string& party, int statement_id) const {
    auto cmp = [](const PartyAnswer& a, const std::pair<const std::string&, int>& v) {
        if (a.party != v.first) return a.party < v.first;
        return a.statement_id < v.second;
    };
    auto it = std::lower_bound(answers.begin(), answers.end(),
                               std::make_pair(std::cref(party).get(), statement_id), cmp);
    if (it != answers.end() && it->party == party && it->statement_id == statement_id) return &*it;
    return nullptr;
}

std::vector<const PartyAnswer*> Questionnaire::answers_for(const std::string& party) const {
    std::vector<const PartyAnswer*> out;
    for (const auto& a : answers) {
        if (a.party == party) out.push_back(&a);
    }
    return out;
}

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& path, std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) throw DatasetError("missing dataset file: " + path.string());
    std::vector<json> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            errors.push_back(path.filename().string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    return records;
}

std::optional<std::string> opt_string(const json& j, const char* field) {
    if (!j.contains(field) || j[field].is_null()) return std::nullopt;
    std::string v = j[field].get<std::string>();
    if (v.empty()) return std::nullopt;
    return v;
}

}  // namespace

Questionnaire load_dataset(const std::filesystem::path& dir) {
    std::vector<std::string> errors;
    auto statement_records = read_jsonl(dir / "statements.jsonl", errors);
    auto party_records = read_jsonl(dir / "parties.jsonl", errors);
    auto answer_records = read_jsonl(dir / "answers.jsonl", errors);

    Questionnaire q;
    for (const auto& j : statement_records) {
        Statement s;
        try {
            s.id = j.at("id").get<int>();
            s.text = j.at("text").get<std::string>();
            s.topic = opt_string(j, "topic");
        } catch (const json::exception& e) {
            errors.push_back("statements.jsonl: bad record: " + std::string(e.what()));
            continue;
        }
        q.statements.push_back(std::move(s));
    }
    for (const auto& j : party_records) {
        try {
            q.parties.push_back(make_party(j.at("key").get<std::string>(),
                                           j.at("name").get<std::string>(),
                                           j.at("origin").get<std::string>(),
                                           j.at("country_code").get<std::string>(),
                                           opt_string(j, "euro_party"), opt_string(j, "euro_group")));
        } catch (const std::exception& e) {
            errors.push_back("parties.jsonl: bad record: " + std::string(e.what()));
        }
    }
    for (const auto& j : answer_records) {
        PartyAnswer a;
        try {
            a.party = j.at("party").get<std::string>();
            a.statement_id = j.at("statement_id").get<int>();
            std::string letter = j.at("answer_letter").get<std::string>();
            auto opt = letter.size() == 1 ? likert_option_from_letter(letter[0]) : std::nullopt;
            if (!opt) {
                errors.push_back("answers.jsonl: invalid answer letter '" + letter + "' for (" +
                                 a.party + ", " + std::to_string(a.statement_id) + ")");
                continue;
            }
            a.answer = *opt;
            a.justification_original = j.value("justification_original", "");
            a.justification_language = j.value("justification_language", "");
            a.justification_english = j.value("justification_english", "");
        } catch (const json::exception& e) {
            errors.push_back("answers.jsonl: bad record: " + std::string(e.what()));
            continue;
        }
        q.answers.push_back(std::move(a));
    }

    // Canonical in-memory order makes loading independent of line order.
    std::sort(q.statements.begin(), q.statements.end(),
              [](const Statement& a, const Statement& b) { return a.id < b.id; });
    std::sort(q.parties.begin(), q.parties.end(),
              [](const Party& a, const Party& b) { return a.key < b.key; });
    std::sort(q.answers.begin(), q.answers.end(), [](const PartyAnswer& a, const PartyAnswer& b) {
        if (a.party != b.party) return a.party < b.party;
        return a.statement_id < b.statement_id;
    });

    // Cross-reference checks collect every offender before failing.
    for (const auto& a : q.answers) {
        if (!q.find_party(a.party)) {
            errors.push_back("answers.jsonl: answer references unknown party '" + a.party + "'");
        }
        if (!q.find_statement(a.statement_id)) {
            errors.push_back("answers.jsonl: answer for party '" + a.party +
                             "' references unknown statement " + std::to_string(a.statement_id));
        }
    }
    for (size_t i = 1; i < q.answers.size(); ++i) {
        if (q.answers[i].party == q.answers[i - 1].party &&
            q.answers[i].statement_id == q.answers[i - 1].statement_id) {
            errors.push_back("answers.jsonl: duplicate answer for (" + q.answers[i].party + ", " +
                             std::to_string(q.answers[i].statement_id) + ")");
        }
    }

    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "dataset validation failed (" << errors.size() << " issue"
            << (errors.size() == 1 ? "" : "s") << "):";
        for (const auto& e : errors) msg << "\n  - " << e;
        throw DatasetError(msg.str());
    }
    return q;
}

void save_dataset(const Questionnaire& q, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "statements.jsonl", std::ios::trunc);
        for (const auto& s : q.statements) {
            json j{{"id", s.id}, {"text", s.text}};
            if (s.topic) j["topic"] = *s.topic;
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(dir / "parties.jsonl", std::ios::trunc);
        for (const auto& p : q.parties) {
            json j{{"key", p.key},
                   {"name", p.name},
                   {"origin", p.origin},
                   {"country_code", p.country_code}};
            if (p.euro_party) j["euro_party"] = *p.euro_party;
            if (p.euro_group) j["euro_group"] = *p.euro_group;
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(dir / "answers.jsonl", std::ios::trunc);
        for (const auto& a : q.answers) {
            json j{{"party", a.party},
                   {"statement_id", a.statement_id},
                   {"answer_letter", std::string(1, a.answer.letter)},
                   {"justification_original", a.justification_original},
                   {"justification_language", a.justification_language},
                   {"justification_english", a.justification_english}};
            out << j.dump() << "\n";
        }
    }
}

std::vector<Issue> validate_dataset(const Questionnaire& q,
                                    std::optional<int> expect_statement_count) {
    std::vector<Issue> issues;
    static const std::set<std::string> known_countries = {"EU", "DE", "FR", "IT", "ES"};

    std::set<int> statement_ids;
    for (const auto& s : q.statements) {
        if (!statement_ids.insert(s.id).second) {
            issues.push_back({"duplicate-statement-id", "statement id " + std::to_string(s.id)});
        }
        if (trim(s.text).empty()) {
            issues.push_back({"empty-statement-text", "statement id " + std::to_string(s.id)});
        }
    }
    if (expect_statement_count && static_cast<int>(q.statements.size()) != *expect_statement_count) {
        issues.push_back({"statement-count-mismatch",
                          "expected " + std::to_string(*expect_statement_count) + " statements, got " +
                              std::to_string(q.statements.size())});
    }

    std::set<std::string> party_keys;
    for (const auto& p : q.parties) {
        if (!party_keys.insert(p.key).second) {
            issues.push_back({"duplicate-party-key", "party " + p.key});
        }
        if (!known_countries.count(p.country_code)) {
            issues.push_back({"unknown-country-code", "party " + p.key + " has country_code '" +
                                                          p.country_code + "'"});
        }
        if (p.country_code == "EU") {
            if (!p.euro_party || *p.euro_party != p.key) {
                issues.push_back(
                    {"euro-party-self-affiliation",
                     "euro-party " + p.key + " must have euro_party equal to its own key"});
            }
        }
        if (p.euro_party && !p.euro_party->empty()) {
            bool found = false;
            for (const auto& other : q.parties) {
                if (other.key == *p.euro_party) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                issues.push_back({"dangling-euro-party",
                                  "party " + p.key + " references unknown euro-party '" +
                                      *p.euro_party + "'"});
            }
        }
    }

    std::set<std::pair<std::string, int>> seen;
    for (const auto& a : q.answers) {
        if (!seen.insert({a.party, a.statement_id}).second) {
            issues.push_back({"duplicate-answer", "(" + a.party + ", " +
                                                      std::to_string(a.statement_id) + ")"});
        }
        if (!party_keys.count(a.party)) {
            issues.push_back({"dangling-party", "answer references unknown party '" + a.party + "'"});
        }
        if (!statement_ids.count(a.statement_id)) {
            issues.push_back({"dangling-statement", "answer for '" + a.party +
                                                        "' references unknown statement " +
                                                        std::to_string(a.statement_id)});
        }
        if (!a.justification_original.empty() && a.justification_english.empty()) {
            issues.push_back({"missing-translation", "(" + a.party + ", " +
                                                         std::to_string(a.statement_id) + ")"});
        }
    }
    return issues;
}

std::string language_name_from_code(const std::string& code) {
    static const std::map<std::string, std::string> names = {
        {"de", "German"}, {"fr", "French"},  {"it", "Italian"},
        {"es", "Spanish"}, {"en", "English"}, {"el", "Greek"},
        {"pt", "Portuguese"}, {"nl", "Dutch"}, {"pl", "Polish"},
    };
    auto it = names.find(to_lower(code));
    if (it != names.end()) return it->second;
    return code;
}

}  // namespace vaaudit
