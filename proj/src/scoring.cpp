#include "vaaudit/scoring.hpp"

#include <cctype>
#include <fstream>

#include <json.hpp>

namespace vaaudit {

using nlohmann::json;

std::string to_string(Stance stance) {
    switch (stance) {
        case Stance::Agree: return "agree";
        case Stance::Disagree: return "disagree";
        case Stance::Neutral: return "neutral";
    }
    return "neutral";
}

namespace {

Stance stance_from_string(const std::string& s) {
    if (s == "agree") return Stance::Agree;
    if (s == "disagree") return Stance::Disagree;
    if (s == "neutral") return Stance::Neutral;
    throw std::invalid_argument("unknown stance: " + s);
}

}  // namespace

Stance binarize(const LikertOption& option) {
    switch (option.letter) {
        case 'a':
        case 'b': return Stance::Disagree;
        case 'c': return Stance::Neutral;
        case 'd':
        case 'e': return Stance::Agree;
    }
    throw std::invalid_argument(std::string("not a likert letter: ") + option.letter);
}

std::optional<LikertOption> parse_option(const std::string& raw, const std::string& prefix) {
    // Scan from where the prefix occurs; when the completion does not echo
    // the prefix, anywhere.
    size_t start = 0;
    if (!prefix.empty()) {
        size_t pos = raw.find(prefix);
        if (pos != std::string::npos) start = pos;
    }
    for (size_t i = start; i + 2 < raw.size(); ++i) {
        if (raw[i] != '(' || raw[i + 2] != ')') continue;
        char letter = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i + 1])));
        if (letter >= 'a' && letter <= 'e') return likert_option_from_letter(letter);
    }
    return std::nullopt;
}

AuditRecord score_record(AuditRecord record, const ScoringPolicy& policy) {
    record.model_stance.reset();
    record.matched.reset();
    record.exclusion_reason.reset();

    if (record.parsed_option) {
        record.model_stance = binarize(*record.parsed_option);
    }
    if (record.error) {
        record.exclusion_reason = "error";
        return record;
    }
    if (policy.exclude_party_neutral && record.party_stance == Stance::Neutral) {
        record.exclusion_reason = "party-neutral";
        return record;
    }
    if (!record.parsed_option) {
        // Compliance failure: the model produced text but no option.
        record.matched = false;
        return record;
    }
    if (!policy.model_neutral_is_mismatch && *record.model_stance == Stance::Neutral &&
        record.party_stance != Stance::Neutral) {
        record.exclusion_reason = "model-neutral";
        return record;
    }
    record.matched = (*record.model_stance == record.party_stance);
    return record;
}

double accuracy(const std::vector<AuditRecord>& records) {
    long scorable = 0, matched = 0;
    for (const auto& r : records) {
        if (r.matched.has_value()) {
            ++scorable;
            if (*r.matched) ++matched;
        }
    }
    if (scorable == 0) throw UndefinedAccuracyError("no scorable records");
    return static_cast<double>(matched) / static_cast<double>(scorable);
}

std::string record_to_jsonl(const AuditRecord& r) {
    nlohmann::ordered_json j;
    j["party"] = r.party;
    j["statement_id"] = r.statement_id;
    j["setting"] = to_string(r.setting);
    j["raw_response"] = r.raw_response;
    if (r.parsed_option) j["parsed_option"] = std::string(1, r.parsed_option->letter);
    if (r.model_stance) j["model_stance"] = to_string(*r.model_stance);
    j["party_stance"] = to_string(r.party_stance);
    if (r.matched) j["matched"] = *r.matched;
    j["degraded_context"] = r.degraded_context;
    if (r.error) j["error"] = *r.error;
    if (r.exclusion_reason) j["exclusion_reason"] = *r.exclusion_reason;
    return j.dump();
}

AuditRecord record_from_jsonl(const std::string& line) {
    json j = json::parse(line);
    AuditRecord r;
    r.party = j.at("party").get<std::string>();
    r.statement_id = j.at("statement_id").get<int>();
    r.setting = setting_from_string(j.at("setting").get<std::string>());
    r.raw_response = j.value("raw_response", "");
    if (j.contains("parsed_option")) {
        r.parsed_option = likert_option_from_letter(j["parsed_option"].get<std::string>().at(0));
    }
    if (j.contains("model_stance")) {
        r.model_stance = stance_from_string(j["model_stance"].get<std::string>());
    }
    r.party_stance = stance_from_string(j.at("party_stance").get<std::string>());
    if (j.contains("matched")) r.matched = j["matched"].get<bool>();
    r.degraded_context = j.value("degraded_context", false);
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    if (j.contains("exclusion_reason")) r.exclusion_reason = j["exclusion_reason"].get<std::string>();
    return r;
}

std::vector<AuditRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open record file: " + path.string());
    std::vector<AuditRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_jsonl(line));
    }
    return records;
}

}  // namespace vaaudit
