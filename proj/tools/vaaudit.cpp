// vaaudit: audit chat-completion endpoints as voting advice applications.
//
// Subcommands: validate (dataset checks), index (build retrieval index),
// audit (run settings), report (aggregate + emit), translate (justification
// translation pass).

#include <cstdlib>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "vaaudit/harness.hpp"
#include "vaaudit/util.hpp"

using namespace vaaudit;

namespace {

struct MockFixtures {
    std::unique_ptr<DeterministicMockBackend> chat;
    std::unique_ptr<FixtureSearchBackend> search;
};

// --mock DIR swaps in the offline backends: a deterministic chat mock and,
// when DIR/web_results.jsonl exists, canned web search results.
MockFixtures make_mocks(const std::filesystem::path& dir) {
    MockFixtures mocks;
    mocks.chat = std::make_unique<DeterministicMockBackend>();
    auto fixture_file = dir / "web_results.jsonl";
    if (std::filesystem::exists(fixture_file)) {
        mocks.search = std::make_unique<FixtureSearchBackend>(fixture_file);
    }
    return mocks;
}

int cmd_validate(const std::filesystem::path& dataset_dir, std::optional<int> expect_statements) {
    Questionnaire q = load_dataset(dataset_dir);
    auto issues = validate_dataset(q, expect_statements);
    if (issues.empty()) {
        std::cout << "dataset ok: " << q.statements.size() << " statements, " << q.parties.size()
                  << " parties, " << q.answers.size() << " answers\n";
        return 0;
    }
    for (const auto& issue : issues) {
        std::cout << issue.code << ": " << issue.detail << "\n";
    }
    std::cerr << issues.size() << " issue(s) found\n";
    return 1;
}

int cmd_index(const std::filesystem::path& corpus_dir, const std::string& backend,
              const std::filesystem::path& out, const std::string& embed_url,
              const std::string& embed_model) {
    auto corpus = load_corpus_dir(corpus_dir);
    if (corpus.empty()) {
        std::cerr << "corpus is empty: " << corpus_dir << "\n";
        return 1;
    }
    Index index;
    if (backend == "lexical") {
        index = build_lexical_index(corpus);
    } else if (backend == "embedding") {
        if (embed_url.empty()) {
            std::cerr << "embedding backend needs --embed-url\n";
            return 1;
        }
        const char* token = std::getenv("VAAUDIT_TOKEN");
        HttpEmbeddingBackend embedder(embed_url, embed_model, token ? token : "");
        index = build_embedding_index(corpus, embedder);
    } else {
        std::cerr << "unknown index backend: " << backend << "\n";
        return 1;
    }
    index.save(out);
    std::cout << "indexed " << corpus.size() << " paragraphs across " << index.partitions.size()
              << " parties -> " << out << "\n";
    return 0;
}

int cmd_audit(RunConfig cfg, const std::string& mock_dir) {
    Questionnaire q = load_dataset(cfg.dataset_dir);
    auto issues = validate_dataset(q, cfg.expect_statement_count);
    if (!issues.empty()) {
        for (const auto& issue : issues) std::cerr << issue.code << ": " << issue.detail << "\n";
        return 1;
    }

    AuditEnvironment env;
    MockFixtures mocks;
    std::unique_ptr<HttpChatBackend> http_chat;
    std::unique_ptr<HttpSearchBackend> http_search;
    std::unique_ptr<FixtureSearchBackend> fixture_search;
    Index curated;

    if (!mock_dir.empty()) {
        mocks = make_mocks(mock_dir);
        env.chat = mocks.chat.get();
        env.search = mocks.search.get();
    } else {
        if (cfg.endpoint_url.empty()) throw ConfigError("endpoint.url is not configured");
        const char* token = cfg.token_env.empty() ? nullptr : std::getenv(cfg.token_env.c_str());
        http_chat = std::make_unique<HttpChatBackend>(cfg.endpoint_url, token ? token : "");
        env.chat = http_chat.get();
        if (!cfg.retrieval.web_fixture_file.empty()) {
            fixture_search = std::make_unique<FixtureSearchBackend>(cfg.retrieval.web_fixture_file);
            env.search = fixture_search.get();
        } else if (!cfg.retrieval.web_url.empty()) {
            http_search = std::make_unique<HttpSearchBackend>(cfg.retrieval.web_url);
            env.search = http_search.get();
        }
    }

    bool wants_sa = false;
    for (auto s : cfg.settings) wants_sa |= (s == Setting::SA);
    if (wants_sa && cfg.retrieval.mode != RetrievalMode::Web) {
        if (!cfg.retrieval.index_path.empty()) {
            curated = Index::load(cfg.retrieval.index_path);
        } else if (!cfg.retrieval.corpus_dir.empty()) {
            curated = build_lexical_index(load_corpus_dir(cfg.retrieval.corpus_dir));
        } else {
            throw ConfigError("curated retrieval needs retrieval.index or retrieval.corpus");
        }
        env.curated_index = &curated;
    }

    auto records = run_audit(cfg, q, env);
    long scorable = 0;
    for (const auto& r : records) scorable += r.matched.has_value() ? 1 : 0;
    std::cout << "audited " << records.size() << " items (" << scorable << " scorable) -> "
              << (cfg.output_dir / "records.jsonl") << "\n";
    return 0;
}

int cmd_report(const std::filesystem::path& records_path, const std::filesystem::path& dataset_dir,
               const std::string& dimension, const std::vector<std::string>& formats,
               const std::filesystem::path& out_dir, const std::string& model_id) {
    Questionnaire q = load_dataset(dataset_dir);
    auto records = load_records(records_path);
    Report report = aggregate(records, dimension_from_string(dimension), q, model_id);
    auto files = emit_report(report, formats, out_dir);
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    std::cout << render_report(report, "table");
    return 0;
}

int cmd_translate(const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir,
                  const std::string& mock_dir, const std::string& endpoint_url,
                  const std::string& model_id, const std::string& token_env) {
    Questionnaire q = load_dataset(dataset_dir);

    std::unique_ptr<DeterministicMockBackend> mock;
    std::unique_ptr<HttpChatBackend> http;
    ChatBackend* backend = nullptr;
    if (!mock_dir.empty()) {
        mock = std::make_unique<DeterministicMockBackend>();
        backend = mock.get();
    } else {
        if (endpoint_url.empty()) throw ConfigError("endpoint url required (or use --mock)");
        const char* token = token_env.empty() ? nullptr : std::getenv(token_env.c_str());
        http = std::make_unique<HttpChatBackend>(endpoint_url, token ? token : "");
        backend = http.get();
    }
    ChatClientConfig cc;
    cc.model_id = model_id;
    ChatClient client(*backend, cc);

    int translated = 0;
    for (auto& answer : q.answers) {
        if (answer.justification_original.empty() || !answer.justification_english.empty()) continue;
        std::string language = language_name_from_code(answer.justification_language);
        answer.justification_english = client.translate(answer.justification_original, language);
        ++translated;
    }
    save_dataset(q, out_dir);
    std::cout << "translated " << translated << " justifications -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audit chat-completion endpoints as voting advice applications"};
    app.require_subcommand(1);

    // validate
    auto* validate = app.add_subcommand("validate", "Check a dataset directory");
    std::string v_dataset;
    int v_expect = -1;
    validate->add_option("--dataset", v_dataset, "Dataset directory")->required();
    validate->add_option("--expect-statements", v_expect, "Expected statement count");

    // index
    auto* index = app.add_subcommand("index", "Build a retrieval index from a manifesto corpus");
    std::string i_corpus, i_backend = "lexical", i_out = "index.json", i_embed_url, i_embed_model;
    index->add_option("--corpus", i_corpus, "Directory of {party_key}.txt manifestos")->required();
    index->add_option("--backend", i_backend, "lexical | embedding");
    index->add_option("--out", i_out, "Output index file");
    index->add_option("--embed-url", i_embed_url, "Embedding endpoint URL");
    index->add_option("--embed-model", i_embed_model, "Embedding model id");

    // audit
    auto* audit = app.add_subcommand("audit", "Run audit settings against an endpoint");
    std::string a_config, a_dataset, a_settings, a_countries, a_parties, a_mock, a_cache, a_out;
    std::string a_endpoint, a_model, a_retrieval, a_corpus, a_index_path;
    int a_concurrency = -1;
    audit->add_option("--config", a_config, "Run configuration file (key = value)");
    audit->add_option("--dataset", a_dataset, "Dataset directory");
    audit->add_option("--settings", a_settings, "Comma list: S0,SA,SB,SB1,SB2,SC");
    audit->add_option("--countries", a_countries, "Restrict to country codes (comma list)");
    audit->add_option("--parties", a_parties, "Restrict to party keys (comma list)");
    audit->add_option("--mock", a_mock, "Fixture directory; use offline mock backends");
    audit->add_option("--cache", a_cache, "Response cache directory");
    audit->add_option("--out", a_out, "Output directory for records");
    audit->add_option("--endpoint", a_endpoint, "Chat endpoint URL");
    audit->add_option("--model", a_model, "Model id");
    audit->add_option("--retrieval", a_retrieval, "Retrieval backend: web | lexical | embedding");
    audit->add_option("--corpus", a_corpus, "Manifesto corpus directory (curated retrieval)");
    audit->add_option("--index", a_index_path, "Prebuilt retrieval index file");
    audit->add_option("--concurrency", a_concurrency, "Worker pool width");

    // report
    auto* report = app.add_subcommand("report", "Aggregate records and emit reports");
    std::string r_records, r_dataset, r_dimension = "party", r_out = ".", r_model;
    std::vector<std::string> r_formats = {"table", "csv", "jsonl"};
    report->add_option("--records", r_records, "records.jsonl from an audit run")->required();
    report->add_option("--dataset", r_dataset, "Dataset directory")->required();
    report->add_option("--dimension", r_dimension, "party | country | euro_group | setting_cross");
    report->add_option("--formats", r_formats, "Output formats (table, csv, jsonl)");
    report->add_option("--out", r_out, "Output directory");
    report->add_option("--model", r_model, "Model id recorded in the report header");

    // translate
    auto* translate = app.add_subcommand("translate", "Fill missing English justifications");
    std::string t_dataset, t_out, t_mock, t_endpoint, t_model, t_token_env = "VAAUDIT_TOKEN";
    translate->add_option("--dataset", t_dataset, "Dataset directory")->required();
    translate->add_option("--out", t_out, "Output dataset directory")->required();
    translate->add_option("--mock", t_mock, "Fixture directory; use the offline mock backend");
    translate->add_option("--endpoint", t_endpoint, "Chat endpoint URL");
    translate->add_option("--model", t_model, "Model id");
    translate->add_option("--token-env", t_token_env, "Environment variable holding the API token");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            return cmd_validate(v_dataset,
                                v_expect >= 0 ? std::optional<int>(v_expect) : std::nullopt);
        }
        if (index->parsed()) {
            return cmd_index(i_corpus, i_backend, i_out, i_embed_url, i_embed_model);
        }
        if (audit->parsed()) {
            RunConfig cfg;
            if (!a_config.empty()) cfg = parse_config_file(a_config);
            if (!a_dataset.empty()) cfg.dataset_dir = a_dataset;
            if (!a_settings.empty()) {
                cfg.settings.clear();
                for (auto& s : split(a_settings, ',')) {
                    if (!trim(s).empty()) cfg.settings.push_back(setting_from_string(s));
                }
            }
            if (cfg.settings.empty()) cfg.settings = {Setting::S0};
            if (!a_countries.empty()) {
                cfg.parties.mode = PartySelector::Mode::Countries;
                cfg.parties.values = split(a_countries, ',');
            }
            if (!a_parties.empty()) {
                cfg.parties.mode = PartySelector::Mode::Keys;
                cfg.parties.values = split(a_parties, ',');
            }
            if (!a_endpoint.empty()) cfg.endpoint_url = a_endpoint;
            if (!a_model.empty()) cfg.model_id = a_model;
            if (!a_retrieval.empty()) {
                cfg.retrieval.mode = a_retrieval == "web"       ? RetrievalMode::Web
                                     : a_retrieval == "lexical" ? RetrievalMode::Lexical
                                                                : RetrievalMode::Embedding;
            }
            if (!a_corpus.empty()) cfg.retrieval.corpus_dir = a_corpus;
            if (!a_index_path.empty()) cfg.retrieval.index_path = a_index_path;
            if (!a_cache.empty()) cfg.cache_dir = a_cache;
            if (!a_out.empty()) cfg.output_dir = a_out;
            if (a_concurrency > 0) cfg.concurrency = a_concurrency;
            if (cfg.output_dir.empty()) cfg.output_dir = "out";
            if (cfg.model_id.empty()) cfg.model_id = a_mock.empty() ? "" : "mock-model";
            return cmd_audit(std::move(cfg), a_mock);
        }
        if (report->parsed()) {
            return cmd_report(r_records, r_dataset, r_dimension, r_formats, r_out, r_model);
        }
        if (translate->parsed()) {
            return cmd_translate(t_dataset, t_out, t_mock, t_endpoint, t_model, t_token_env);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
