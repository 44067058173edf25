#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vaaudit/dataset.hpp"
#include "vaaudit/model_client.hpp"
#include "vaaudit/retrieval.hpp"
#include "vaaudit/scoring.hpp"

namespace vaaudit {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Which parties a run covers.
struct PartySelector {
    enum class Mode { All, Countries, Keys };
    Mode mode = Mode::All;
    std::vector<std::string> values;
};

enum class RetrievalMode { Lexical, Embedding, Web };

struct RetrievalConfig {
    RetrievalMode mode = RetrievalMode::Web;
    std::filesystem::path corpus_dir;          // manifesto .txt files
    std::filesystem::path index_path;          // prebuilt index (optional)
    std::string embed_url;
    std::string embed_model;
    int k = 3;
    int web_limit = 4;
    std::string web_url;
    std::filesystem::path web_fixture_file;
};

struct RunConfig {
    std::filesystem::path dataset_dir;
    std::vector<Setting> settings;
    PartySelector parties;
    std::string endpoint_url;
    std::string model_id;
    std::string token_env = "VAAUDIT_TOKEN";
    RetrievalConfig retrieval;
    double temperature = 0.0;
    int max_tokens = 512;
    PrefixMode prefix_mode = PrefixMode::AssistantTurn;
    int concurrency = 4;
    std::filesystem::path cache_dir;
    std::filesystem::path output_dir;
    std::vector<std::string> report_formats = {"table", "csv", "jsonl"};
    std::string system_prompt;  // empty -> default
    ScoringPolicy scoring;
    std::optional<int> expect_statement_count;

    /// Stable fingerprint of everything that affects record content.
    std::string digest() const;
};

/// Parses the plain-text `key = value` run configuration format. Unknown
/// keys are an error.
RunConfig parse_config_file(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir);

/// Resolves a selector against the registry; throws ConfigError when the
/// selection is empty or names unknown values.
std::vector<const Party*> select_parties(const Questionnaire& q, const PartySelector& sel);

struct ReportCell {
    std::optional<double> accuracy;  // fraction in [0,1]; absent -> "-"
    int scorable = 0;
    int matched = 0;
    int excluded = 0;
    int unparsed = 0;
};

enum class Dimension { Party, Country, EuroGroup, SettingCross };

Dimension dimension_from_string(const std::string& s);
std::string to_string(Dimension d);

struct Report {
    Dimension dimension = Dimension::Party;
    std::string model_id;
    std::string config_digest;
    // (group value, setting) -> cell. Group ordering for emission is
    // row-major over `groups`.
    std::map<std::string, std::map<Setting, ReportCell>> cells;
    std::vector<std::string> groups;    // emission order
    std::vector<Setting> settings;      // column order
    // party -> country, used to lay out the party table in country blocks
    std::map<std::string, std::string> party_country;
    std::map<std::string, std::string> party_euro;
};

/// Aggregates scored records along one dimension.
///
/// Country and overall accuracies are unweighted means over member-party
/// accuracies, not pooled records; euro-group accuracy pools the records
/// of the euro-party and its affiliated national parties. Scorable,
/// excluded and unparsed counts always sum.
Report aggregate(const std::vector<AuditRecord>& records, Dimension dimension,
                 const Questionnaire& q, const std::string& model_id = "",
                 const std::string& config_digest = "");

/// Renders a report in one format: "table" (text table, parties x
/// settings in country blocks, euro alignment first), "csv", or "jsonl".
std::string render_report(const Report& report, const std::string& format);

/// Writes report_{dimension}.{txt,csv,jsonl} files. Output is
/// deterministic: emitting the same report twice yields identical bytes.
std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::vector<std::string>& formats,
                                               const std::filesystem::path& out_dir);

/// External collaborators an audit run needs. Tests inject mocks here.
struct AuditEnvironment {
    ChatBackend* chat = nullptr;
    SearchBackend* search = nullptr;          // Web retrieval mode
    const Index* curated_index = nullptr;     // Lexical/Embedding retrieval mode
};

/// Runs the full audit: one record per (selected party, answered
/// statement, setting). Records are scored, persisted incrementally to
/// records.jsonl in deterministic work order, and resumable through both
/// the response cache and a resume marker.
std::vector<AuditRecord> run_audit(const RunConfig& config, const Questionnaire& q,
                                   const AuditEnvironment& env);

}  // namespace vaaudit
