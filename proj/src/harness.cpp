#include "vaaudit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vaaudit/util.hpp"

namespace vaaudit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

PartySelector parse_selector(const std::string& value) {
    PartySelector sel;
    std::string v = trim(value);
    if (v == "all" || v.empty()) {
        sel.mode = PartySelector::Mode::All;
        return sel;
    }
    auto colon = v.find(':');
    std::string head = colon == std::string::npos ? v : v.substr(0, colon);
    std::string tail = colon == std::string::npos ? "" : v.substr(colon + 1);
    if (head == "countries") {
        sel.mode = PartySelector::Mode::Countries;
    } else if (head == "keys") {
        sel.mode = PartySelector::Mode::Keys;
    } else {
        throw ConfigError("bad parties selector: " + value);
    }
    for (auto& item : split(tail, ',')) {
        std::string t = trim(item);
        if (!t.empty()) sel.values.push_back(t);
    }
    if (sel.values.empty()) throw ConfigError("empty parties selector: " + value);
    return sel;
}

RetrievalMode retrieval_mode_from_string(const std::string& s) {
    std::string v = to_lower(trim(s));
    if (v == "lexical") return RetrievalMode::Lexical;
    if (v == "embedding") return RetrievalMode::Embedding;
    if (v == "web") return RetrievalMode::Web;
    throw ConfigError("unknown retrieval backend: " + s);
}

std::string retrieval_mode_to_string(RetrievalMode m) {
    switch (m) {
        case RetrievalMode::Lexical: return "lexical";
        case RetrievalMode::Embedding: return "embedding";
        case RetrievalMode::Web: return "web";
    }
    return "web";
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        std::filesystem::path path(p);
        if (path.is_absolute() || base_dir.empty()) return path;
        return base_dir / path;
    };
    int lineno = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key == "dataset") cfg.dataset_dir = resolve(value);
        else if (key == "settings") {
            cfg.settings.clear();
            for (auto& s : split(value, ',')) {
                if (!trim(s).empty()) cfg.settings.push_back(setting_from_string(s));
            }
        } else if (key == "parties") cfg.parties = parse_selector(value);
        else if (key == "endpoint.url") cfg.endpoint_url = value;
        else if (key == "endpoint.model") cfg.model_id = value;
        else if (key == "endpoint.token_env") cfg.token_env = value;
        else if (key == "retrieval.backend") cfg.retrieval.mode = retrieval_mode_from_string(value);
        else if (key == "retrieval.corpus") cfg.retrieval.corpus_dir = resolve(value);
        else if (key == "retrieval.index") cfg.retrieval.index_path = resolve(value);
        else if (key == "retrieval.embed_url") cfg.retrieval.embed_url = value;
        else if (key == "retrieval.embed_model") cfg.retrieval.embed_model = value;
        else if (key == "retrieval.k") cfg.retrieval.k = std::stoi(value);
        else if (key == "retrieval.web_limit") cfg.retrieval.web_limit = std::stoi(value);
        else if (key == "retrieval.web_url") cfg.retrieval.web_url = value;
        else if (key == "retrieval.web_fixtures") cfg.retrieval.web_fixture_file = resolve(value);
        else if (key == "decode.temperature") cfg.temperature = std::stod(value);
        else if (key == "decode.max_tokens") cfg.max_tokens = std::stoi(value);
        else if (key == "prefix_mode") {
            std::string v = to_lower(value);
            if (v == "assistant" || v == "assistant-turn") cfg.prefix_mode = PrefixMode::AssistantTurn;
            else if (v == "instruction" || v == "user-instruction")
                cfg.prefix_mode = PrefixMode::UserInstruction;
            else throw ConfigError("unknown prefix_mode: " + value);
        } else if (key == "concurrency") cfg.concurrency = std::stoi(value);
        else if (key == "cache") cfg.cache_dir = resolve(value);
        else if (key == "output") cfg.output_dir = resolve(value);
        else if (key == "report.formats") {
            cfg.report_formats.clear();
            for (auto& f : split(value, ',')) {
                if (!trim(f).empty()) cfg.report_formats.push_back(trim(f));
            }
        } else if (key == "system_prompt") cfg.system_prompt = value;
        else if (key == "scoring.exclude_party_neutral")
            cfg.scoring.exclude_party_neutral = (to_lower(value) == "true" || value == "1");
        else if (key == "scoring.model_neutral_is_mismatch")
            cfg.scoring.model_neutral_is_mismatch = (to_lower(value) == "true" || value == "1");
        else if (key == "expect_statements") cfg.expect_statement_count = std::stoi(value);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    return parse_config_text(read_file(path.string()), path.parent_path());
}

std::string RunConfig::digest() const {
    std::ostringstream blob;
    blob << dataset_dir.string() << '\x1f';
    for (auto s : settings) blob << to_string(s) << ',';
    blob << '\x1f' << static_cast<int>(parties.mode) << '\x1f';
    for (const auto& v : parties.values) blob << v << ',';
    blob << '\x1f' << model_id << '\x1f' << retrieval_mode_to_string(retrieval.mode) << '\x1f'
         << retrieval.k << '\x1f' << retrieval.web_limit << '\x1f' << temperature << '\x1f'
         << max_tokens << '\x1f' << to_string(prefix_mode) << '\x1f' << system_prompt << '\x1f'
         << scoring.exclude_party_neutral << scoring.model_neutral_is_mismatch;
    return content_digest(blob.str());
}

std::vector<const Party*> select_parties(const Questionnaire& q, const PartySelector& sel) {
    std::vector<const Party*> out;
    switch (sel.mode) {
        case PartySelector::Mode::All:
            for (const auto& p : q.parties) out.push_back(&p);
            break;
        case PartySelector::Mode::Countries: {
            std::set<std::string> wanted;
            for (const auto& v : sel.values) wanted.insert(to_lower(v));
            for (const auto& p : q.parties) {
                if (wanted.count(to_lower(p.country_code))) out.push_back(&p);
            }
            break;
        }
        case PartySelector::Mode::Keys: {
            for (const auto& key : sel.values) {
                const Party* p = q.find_party(key);
                if (!p) throw ConfigError("unknown party key: " + key);
                out.push_back(p);
            }
            std::sort(out.begin(), out.end(),
                      [](const Party* a, const Party* b) { return a->key < b->key; });
            out.erase(std::unique(out.begin(), out.end()), out.end());
            break;
        }
    }
    if (out.empty()) throw ConfigError("party selection is empty");
    return out;
}

// ---------------------------------------------------------------------------
// Audit run

namespace {

struct WorkItem {
    const Party* party = nullptr;
    const Statement* statement = nullptr;
    const PartyAnswer* answer = nullptr;
    Setting setting = Setting::S0;
};

SettingContext build_context(const RunConfig& cfg, const AuditEnvironment& env,
                             const WorkItem& item, bool& degraded) {
    SettingContext context;
    degraded = false;
    switch (item.setting) {
        case Setting::SC:
            context.justification = item.answer->justification_english;
            break;
        case Setting::SA: {
            if (cfg.retrieval.mode == RetrievalMode::Web) {
                context.snippet_origin = SnippetOrigin::Web;
                if (env.search) {
                    try {
                        context.snippets = web_search(*env.search, item.party->key,
                                                      item.statement->text,
                                                      cfg.retrieval.web_limit);
                    } catch (const SearchError&) {
                        context.snippets.clear();
                    }
                }
            } else {
                context.snippet_origin = SnippetOrigin::Manifesto;
                if (env.curated_index && env.curated_index->has_party(item.party->key)) {
                    context.snippets = retrieve(*env.curated_index, item.party->key,
                                                item.statement->text, cfg.retrieval.k);
                }
            }
            if (context.snippets.empty()) degraded = true;
            break;
        }
        default:
            break;
    }
    return context;
}

AuditRecord execute_item(const RunConfig& cfg, const AuditEnvironment& env, ChatClient& client,
                         const PromptConfig& prompt_config, const WorkItem& item) {
    AuditRecord record;
    record.party = item.party->key;
    record.statement_id = item.statement->id;
    record.setting = item.setting;
    record.party_stance = binarize(item.answer->answer);

    bool degraded = false;
    std::vector<Dialogue> stages;
    try {
        SettingContext context = build_context(cfg, env, item, degraded);
        stages = render_setting(item.setting, *item.party, *item.statement, context, prompt_config);
        record.degraded_context = degraded;
    } catch (const MissingContextError& e) {
        record.error = e.what();
        return score_record(std::move(record), cfg.scoring);
    }

    StagedResult staged = client.run_staged(stages);
    if (!staged.ok()) {
        record.error = staged.error;
        if (!staged.responses.empty()) record.raw_response = staged.responses.back().text;
        return score_record(std::move(record), cfg.scoring);
    }
    record.raw_response = staged.responses.back().text;
    record.parsed_option = parse_option(record.raw_response, stages.back().response_prefix);
    return score_record(std::move(record), cfg.scoring);
}

// Writes records to disk in work-item order regardless of completion
// order, so identical runs produce identical bytes.
class OrderedRecordWriter {
  public:
    OrderedRecordWriter(const std::filesystem::path& path, size_t start_index, bool append)
        : out_(path, append ? std::ios::app : std::ios::trunc), next_(start_index) {
        if (!out_) throw std::runtime_error("cannot open record file: " + path.string());
    }

    void deliver(size_t index, const AuditRecord& record) {
        std::unique_lock<std::mutex> lock(mutex_);
        pending_.emplace(index, record_to_jsonl(record));
        while (!pending_.empty() && pending_.begin()->first == next_) {
            out_ << pending_.begin()->second << "\n";
            pending_.erase(pending_.begin());
            ++next_;
        }
        out_.flush();
    }

  private:
    std::ofstream out_;
    std::mutex mutex_;
    std::map<size_t, std::string> pending_;
    size_t next_;
};

struct ResumeMarker {
    std::string config_digest;
    size_t completed = 0;
};

std::optional<ResumeMarker> read_marker(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        json j = json::parse(in);
        return ResumeMarker{j.at("config_digest").get<std::string>(),
                            j.at("completed").get<size_t>()};
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<AuditRecord> run_audit(const RunConfig& cfg, const Questionnaire& q,
                                   const AuditEnvironment& env) {
    if (cfg.settings.empty()) throw ConfigError("no settings selected");
    if (!env.chat) throw ConfigError("no chat backend configured");
    auto parties = select_parties(q, cfg.parties);

    bool needs_curated = false;
    for (auto s : cfg.settings) {
        if (s == Setting::SA && cfg.retrieval.mode != RetrievalMode::Web) needs_curated = true;
    }
    if (needs_curated && !env.curated_index) {
        throw ConfigError("setting SA with curated retrieval needs an index");
    }

    PromptConfig prompt_config = default_prompt_config();
    if (!cfg.system_prompt.empty()) prompt_config.system_prompt = cfg.system_prompt;

    // Deterministic work order: party key, statement id, settings as given.
    std::vector<WorkItem> items;
    for (const Party* party : parties) {
        for (const auto& statement : q.statements) {
            const PartyAnswer* answer = q.find_answer(party->key, statement.id);
            if (!answer) continue;  // parties may skip statements
            for (Setting setting : cfg.settings) {
                items.push_back(WorkItem{party, &statement, answer, setting});
            }
        }
    }

    ChatClientConfig client_config;
    client_config.model_id = cfg.model_id;
    client_config.temperature = cfg.temperature;
    client_config.max_tokens = cfg.max_tokens;
    client_config.prefix_mode = cfg.prefix_mode;
    if (!cfg.cache_dir.empty()) client_config.cache_dir = cfg.cache_dir;
    ChatClient client(*env.chat, client_config);

    std::filesystem::path records_path;
    std::filesystem::path marker_path;
    size_t start_index = 0;
    std::unique_ptr<OrderedRecordWriter> writer;
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        records_path = cfg.output_dir / "records.jsonl";
        marker_path = cfg.output_dir / "records.resume";
        if (auto marker = read_marker(marker_path)) {
            if (marker->config_digest == cfg.digest() && marker->completed <= items.size() &&
                std::filesystem::exists(records_path)) {
                start_index = marker->completed;
            }
        }
        writer = std::make_unique<OrderedRecordWriter>(records_path, start_index, start_index > 0);
    }

    std::vector<AuditRecord> records(items.size());
    std::vector<char> done(items.size(), 0);

    // Records already on disk (resumed run) are reloaded, not re-executed.
    if (start_index > 0) {
        auto existing = load_records(records_path);
        for (size_t i = 0; i < start_index && i < existing.size(); ++i) {
            records[i] = existing[i];
            done[i] = 1;
        }
    }

    std::atomic<size_t> cursor{start_index};
    std::mutex marker_mutex;
    size_t completed = start_index;
    auto update_marker = [&](size_t count) {
        if (marker_path.empty()) return;
        json j{{"config_digest", cfg.digest()}, {"completed", count}};
        write_file(marker_path.string(), j.dump());
    };

    auto work = [&]() {
        while (true) {
            size_t index = cursor.fetch_add(1);
            if (index >= items.size()) return;
            AuditRecord record = execute_item(cfg, env, client, prompt_config, items[index]);
            records[index] = std::move(record);
            if (writer) writer->deliver(index, records[index]);
            std::lock_guard<std::mutex> lock(marker_mutex);
            done[index] = 1;
            while (completed < items.size() && done[completed]) ++completed;
            update_marker(completed);
        }
    };

    int width = std::max(1, cfg.concurrency);
    if (width == 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<size_t>(width));
        for (int i = 0; i < width; ++i) workers.emplace_back(work);
        for (auto& w : workers) w.join();
    }

    // A finished run needs no resume marker.
    if (!marker_path.empty() && completed == items.size()) {
        std::error_code ec;
        std::filesystem::remove(marker_path, ec);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Aggregation

Dimension dimension_from_string(const std::string& s) {
    std::string v = to_lower(trim(s));
    if (v == "party") return Dimension::Party;
    if (v == "country") return Dimension::Country;
    if (v == "euro_group" || v == "eurogroup") return Dimension::EuroGroup;
    if (v == "setting_cross" || v == "setting") return Dimension::SettingCross;
    throw ConfigError("unknown report dimension: " + s);
}

std::string to_string(Dimension d) {
    switch (d) {
        case Dimension::Party: return "party";
        case Dimension::Country: return "country";
        case Dimension::EuroGroup: return "euro_group";
        case Dimension::SettingCross: return "setting_cross";
    }
    return "party";
}

namespace {

struct Tally {
    int scorable = 0;
    int matched = 0;
    int excluded = 0;
    int unparsed = 0;

    void add(const AuditRecord& r) {
        if (r.matched.has_value()) {
            ++scorable;
            if (*r.matched) ++matched;
            if (!r.parsed_option && !r.error) ++unparsed;
        } else {
            ++excluded;
        }
    }
    void merge(const Tally& other) {
        scorable += other.scorable;
        matched += other.matched;
        excluded += other.excluded;
        unparsed += other.unparsed;
    }
};

ReportCell cell_from_tally(const Tally& tally) {
    ReportCell cell;
    cell.scorable = tally.scorable;
    cell.matched = tally.matched;
    cell.excluded = tally.excluded;
    cell.unparsed = tally.unparsed;
    if (tally.scorable > 0) {
        cell.accuracy = static_cast<double>(tally.matched) / tally.scorable;
    }
    return cell;
}

// Mean over member-party accuracies; parties without scorable records in
// a setting drop out of that cell's mean.
ReportCell unweighted_mean_cell(const std::vector<Tally>& member_tallies) {
    ReportCell cell;
    double sum = 0.0;
    int n = 0;
    for (const auto& t : member_tallies) {
        cell.scorable += t.scorable;
        cell.matched += t.matched;
        cell.excluded += t.excluded;
        cell.unparsed += t.unparsed;
        if (t.scorable > 0) {
            sum += static_cast<double>(t.matched) / t.scorable;
            ++n;
        }
    }
    if (n > 0) cell.accuracy = sum / n;
    return cell;
}

const std::vector<std::string> kCountryOrder = {"EU", "DE", "FR", "IT", "ES"};

}  // namespace

Report aggregate(const std::vector<AuditRecord>& records, Dimension dimension,
                 const Questionnaire& q, const std::string& model_id,
                 const std::string& config_digest) {
    Report report;
    report.dimension = dimension;
    report.model_id = model_id;
    report.config_digest = config_digest;

    // Settings present in the records, in canonical order.
    std::set<Setting> settings_seen;
    for (const auto& r : records) settings_seen.insert(r.setting);
    for (Setting s : all_settings()) {
        if (settings_seen.count(s)) report.settings.push_back(s);
    }

    // Per (party, setting) tallies underlie every dimension.
    std::map<std::string, std::map<Setting, Tally>> party_tallies;
    for (const auto& r : records) {
        if (!q.find_party(r.party)) {
            throw ConfigError("record references unknown party '" + r.party + "'");
        }
        party_tallies[r.party][r.setting].add(r);
    }

    auto country_of = [&](const std::string& key) { return q.find_party(key)->country_code; };
    auto euro_group_of = [&](const std::string& key) -> std::string {
        const Party* p = q.find_party(key);
        if (p->euro_group && !p->euro_group->empty()) return *p->euro_group;
        // National parties without their own group inherit their
        // euro-party's.
        if (p->euro_party && !p->euro_party->empty()) {
            const Party* euro = q.find_party(*p->euro_party);
            if (euro && euro->euro_group && !euro->euro_group->empty()) return *euro->euro_group;
        }
        return "unaffiliated";
    };

    for (const auto& [party, _] : party_tallies) {
        report.party_country[party] = country_of(party);
        const Party* p = q.find_party(party);
        report.party_euro[party] = p->euro_party.value_or("");
    }

    switch (dimension) {
        case Dimension::Party: {
            for (const auto& [party, by_setting] : party_tallies) {
                for (const auto& [setting, tally] : by_setting) {
                    report.cells[party][setting] = cell_from_tally(tally);
                }
            }
            // Country-block ordering: EU, DE, FR, IT, ES, then key.
            std::vector<std::string> groups;
            for (const auto& [party, _] : party_tallies) groups.push_back(party);
            std::sort(groups.begin(), groups.end(), [&](const std::string& a, const std::string& b) {
                auto rank = [&](const std::string& key) {
                    auto it = std::find(kCountryOrder.begin(), kCountryOrder.end(), country_of(key));
                    return std::distance(kCountryOrder.begin(), it);
                };
                auto ra = rank(a), rb = rank(b);
                if (ra != rb) return ra < rb;
                return a < b;
            });
            report.groups = std::move(groups);
            break;
        }
        case Dimension::Country: {
            std::map<std::string, std::map<Setting, std::vector<Tally>>> grouped;
            for (const auto& [party, by_setting] : party_tallies) {
                for (const auto& [setting, tally] : by_setting) {
                    grouped[country_of(party)][setting].push_back(tally);
                }
            }
            for (const auto& [country, by_setting] : grouped) {
                for (const auto& [setting, tallies] : by_setting) {
                    report.cells[country][setting] = unweighted_mean_cell(tallies);
                }
            }
            for (const auto& c : kCountryOrder) {
                if (report.cells.count(c)) report.groups.push_back(c);
            }
            for (const auto& [c, _] : report.cells) {
                if (std::find(report.groups.begin(), report.groups.end(), c) == report.groups.end()) {
                    report.groups.push_back(c);
                }
            }
            break;
        }
        case Dimension::EuroGroup: {
            // Pools each euro-party's records with its affiliated
            // national parties.
            std::map<std::string, std::map<Setting, Tally>> grouped;
            for (const auto& [party, by_setting] : party_tallies) {
                std::string group = euro_group_of(party);
                for (const auto& [setting, tally] : by_setting) {
                    grouped[group][setting].merge(tally);
                }
            }
            for (const auto& [group, by_setting] : grouped) {
                for (const auto& [setting, tally] : by_setting) {
                    report.cells[group][setting] = cell_from_tally(tally);
                }
                report.groups.push_back(group);
            }
            break;
        }
        case Dimension::SettingCross: {
            std::map<Setting, std::vector<Tally>> by_setting;
            for (const auto& [party, tallies] : party_tallies) {
                for (const auto& [setting, tally] : tallies) {
                    by_setting[setting].push_back(tally);
                }
            }
            for (const auto& [setting, tallies] : by_setting) {
                report.cells["all"][setting] = unweighted_mean_cell(tallies);
            }
            report.groups.push_back("all");
            break;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace {

std::string format_accuracy(const std::optional<double>& accuracy) {
    if (!accuracy) return "-";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", *accuracy * 100.0);
    return buf;
}

std::string pad(const std::string& s, size_t width) {
    if (s.size() >= width) return s;
    return s + std::string(width - s.size(), ' ');
}

std::string rtrim(std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
}

std::string render_table(const Report& report) {
    std::ostringstream out;
    bool party_dim = report.dimension == Dimension::Party;

    size_t group_width = party_dim ? 6 : std::string(to_string(report.dimension)).size();
    size_t name_width = 5;
    for (const auto& g : report.groups) {
        name_width = std::max(name_width, g.size());
        if (party_dim) {
            auto it = report.party_euro.find(g);
            if (it != report.party_euro.end()) group_width = std::max(group_width, it->second.size());
        }
    }
    group_width = std::max(group_width, std::string("group").size());

    auto header = [&]() {
        std::ostringstream h;
        if (party_dim) h << pad("euro", group_width) << "  ";
        h << pad(party_dim ? "party" : to_string(report.dimension), name_width);
        for (Setting s : report.settings) h << "  " << pad(setting_label(s), 6);
        return h.str();
    };
    auto row = [&](const std::string& label, const std::string& euro,
                   const std::map<Setting, ReportCell>* cells) {
        std::ostringstream r;
        if (party_dim) r << pad(euro, group_width) << "  ";
        r << pad(label, name_width);
        for (Setting s : report.settings) {
            std::string v = "-";
            if (cells) {
                auto it = cells->find(s);
                if (it != cells->end()) v = format_accuracy(it->second.accuracy);
            }
            r << "  " << pad(v, 6);
        }
        return rtrim(r.str());
    };

    if (!report.model_id.empty()) out << "model: " << report.model_id << "\n";
    if (!report.config_digest.empty()) out << "config: " << report.config_digest << "\n";

    if (party_dim) {
        // Country blocks with a per-country average row, euro-party
        // alignment in the first column.
        std::vector<std::string> countries;
        for (const auto& g : report.groups) {
            const std::string& c = report.party_country.at(g);
            if (std::find(countries.begin(), countries.end(), c) == countries.end()) {
                countries.push_back(c);
            }
        }
        for (const auto& country : countries) {
            out << "[" << country << "]\n" << header() << "\n";
            std::map<Setting, std::vector<ReportCell>> country_cells;
            for (const auto& g : report.groups) {
                if (report.party_country.at(g) != country) continue;
                const auto& cells = report.cells.at(g);
                out << row(g, report.party_euro.count(g) ? report.party_euro.at(g) : "", &cells)
                    << "\n";
                for (const auto& [s, cell] : cells) country_cells[s].push_back(cell);
            }
            std::map<Setting, ReportCell> avg;
            for (const auto& [s, cells] : country_cells) {
                double sum = 0.0;
                int n = 0;
                for (const auto& c : cells) {
                    if (c.accuracy) {
                        sum += *c.accuracy;
                        ++n;
                    }
                }
                ReportCell cell;
                if (n > 0) cell.accuracy = sum / n;
                avg[s] = cell;
            }
            out << row("Avg.", "", &avg) << "\n\n";
        }
    } else {
        out << header() << "\n";
        for (const auto& g : report.groups) {
            out << row(g, "", &report.cells.at(g)) << "\n";
        }
    }
    return out.str();
}

std::string render_csv(const Report& report) {
    std::ostringstream out;
    out << "dimension,group,setting,accuracy,scorable,matched,excluded,unparsed\n";
    for (const auto& g : report.groups) {
        const auto& by_setting = report.cells.at(g);
        for (Setting s : report.settings) {
            auto it = by_setting.find(s);
            out << to_string(report.dimension) << "," << g << "," << to_string(s) << ",";
            if (it != by_setting.end()) {
                const ReportCell& c = it->second;
                if (c.accuracy) {
                    char buf[24];
                    std::snprintf(buf, sizeof(buf), "%.6f", *c.accuracy);
                    out << buf;
                }
                out << "," << c.scorable << "," << c.matched << "," << c.excluded << ","
                    << c.unparsed << "\n";
            } else {
                out << ",0,0,0,0\n";
            }
        }
    }
    return out.str();
}

std::string render_jsonl(const Report& report) {
    std::ostringstream out;
    nlohmann::ordered_json meta;
    meta["type"] = "meta";
    meta["dimension"] = to_string(report.dimension);
    meta["model"] = report.model_id;
    meta["config_digest"] = report.config_digest;
    out << meta.dump() << "\n";
    for (const auto& g : report.groups) {
        const auto& by_setting = report.cells.at(g);
        for (Setting s : report.settings) {
            auto it = by_setting.find(s);
            if (it == by_setting.end()) continue;
            nlohmann::ordered_json j;
            j["type"] = "cell";
            j["group"] = g;
            j["setting"] = to_string(s);
            if (it->second.accuracy) j["accuracy"] = *it->second.accuracy;
            j["scorable"] = it->second.scorable;
            j["matched"] = it->second.matched;
            j["excluded"] = it->second.excluded;
            j["unparsed"] = it->second.unparsed;
            out << j.dump() << "\n";
        }
    }
    return out.str();
}

}  // namespace

std::string render_report(const Report& report, const std::string& format) {
    std::string f = to_lower(trim(format));
    if (f == "table" || f == "table-text" || f == "txt") return render_table(report);
    if (f == "csv" || f == "delimited-values") return render_csv(report);
    if (f == "jsonl" || f == "structured-records") return render_jsonl(report);
    throw ConfigError("unknown report format: " + format);
}

std::vector<std::filesystem::path> emit_report(const Report& report,
                                               const std::vector<std::string>& formats,
                                               const std::filesystem::path& out_dir) {
    if (report.groups.empty()) throw ConfigError("cannot emit an empty report");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& format : formats) {
        std::string f = to_lower(trim(format));
        std::string ext = (f == "table" || f == "table-text" || f == "txt") ? "txt"
                          : (f == "csv" || f == "delimited-values")         ? "csv"
                                                                            : "jsonl";
        auto path = out_dir / ("report_" + to_string(report.dimension) + "." + ext);
        write_file(path.string(), render_report(report, format));
        written.push_back(path);
    }
    return written;
}

}  // namespace vaaudit
