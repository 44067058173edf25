#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vaaudit {

struct Party;

/// One paragraph of a party manifesto after splitting/merging.
struct CorpusParagraph {
    std::string party;
    int index = 0;
    std::string text;

    bool operator==(const CorpusParagraph&) const = default;
};

/// A scored excerpt returned by retrieval, with source attribution.
struct RetrievedSnippet {
    std::string source;  // "{party_key} manifesto, paragraph N" or "title (url)"
    std::string text;
    double score = 0.0;
    std::string party;

    bool operator==(const RetrievedSnippet&) const = default;
};

/// Splits raw manifesto text on blank-line boundaries. Paragraphs shorter
/// than 200 characters are merged forward into the next one; paragraphs
/// longer than 2000 characters are split at the sentence boundary nearest
/// the limit. Indices are consecutive from 0. Empty input yields an empty
/// list.
std::vector<CorpusParagraph> split_manifesto(const std::string& party_key,
                                             const std::string& raw);

/// Loads every `{party_key}.txt` file under a corpus directory and splits
/// each into paragraphs.
std::vector<CorpusParagraph> load_corpus_dir(const std::filesystem::path& dir);

class RetrievalError : public std::runtime_error {
  public:
    explicit RetrievalError(const std::string& what) : std::runtime_error(what) {}
};

/// Produces one fixed-dimension vector per input text.
class EmbeddingBackend {
  public:
    virtual ~EmbeddingBackend() = default;
    virtual std::string id() const = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

/// Client for an HTTP embedding endpoint taking {"input": [texts]} and
/// returning {"data": [{"embedding": [...]}, ...]}.
class HttpEmbeddingBackend : public EmbeddingBackend {
  public:
    HttpEmbeddingBackend(std::string url, std::string model, std::string auth_token = "");
    std::string id() const override;
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

  private:
    std::string url_;
    std::string model_;
    std::string auth_token_;
};

/// Sparse or dense paragraph vectors for one party partition.
struct IndexPartition {
    std::vector<CorpusParagraph> paragraphs;
    // Sparse lexical weights, one map per paragraph (lexical backend).
    std::vector<std::map<std::string, double>> sparse;
    // Dense embeddings, one vector per paragraph (embedding backend).
    std::vector<std::vector<double>> dense;
};

/// Party-partitioned retrieval index. Immutable after build; reads are
/// safe from any number of threads.
struct Index {
    std::string backend_id;  // "lexical" or the embedding backend id
    // Per-partition document frequencies and document count feed query
    // weighting for the lexical backend.
    std::map<std::string, IndexPartition> partitions;
    std::map<std::string, std::map<std::string, int>> doc_freq;

    bool has_party(const std::string& party) const { return partitions.count(party) > 0; }
    std::string to_json() const;
    static Index from_json(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static Index load(const std::filesystem::path& path);
};

/// Builds a lexical index: per-partition term-frequency x
/// inverse-document-frequency weights, cosine-compared at query time.
Index build_lexical_index(const std::vector<CorpusParagraph>& corpus);

/// Builds a dense index by embedding every paragraph through the backend.
/// A backend failure is reported with the party and paragraph batch that
/// failed.
Index build_embedding_index(const std::vector<CorpusParagraph>& corpus,
                            EmbeddingBackend& backend);

/// Returns min(k, partition size) snippets ordered by non-increasing
/// cosine similarity; ties break toward the lower paragraph index.
/// Throws RetrievalError for an unknown party. The overload without a
/// backend serves lexical indices; dense indices embed the query through
/// the same backend that built them.
std::vector<RetrievedSnippet> retrieve(const Index& index, const std::string& party,
                                       const std::string& query, int k);
std::vector<RetrievedSnippet> retrieve(const Index& index, const std::string& party,
                                       const std::string& query, int k,
                                       EmbeddingBackend& backend);

/// Snippet turn body for curated-corpus augmentation: header naming the
/// party's official manifesto followed by the numbered snippets.
std::string format_snippets(const Party& party,
                            const std::vector<RetrievedSnippet>& snippets);

/// One web search hit before snippet conversion.
struct SearchResult {
    std::string title;
    std::string url;
    std::string snippet;

    bool operator==(const SearchResult&) const = default;
};

class SearchError : public std::runtime_error {
  public:
    explicit SearchError(const std::string& what) : std::runtime_error(what) {}
};

class SearchBackend {
  public:
    virtual ~SearchBackend() = default;
    /// May throw SearchError on transport failure (retried by web_search).
    virtual std::vector<SearchResult> search(const std::string& query, int limit) = 0;
};

/// Serves canned results from a jsonl file of records
/// {"query_contains": ..., "results": [{title, url, snippet}]}. The first
/// record whose pattern is a substring of the query wins; an empty
/// pattern acts as a catch-all.
class FixtureSearchBackend : public SearchBackend {
  public:
    explicit FixtureSearchBackend(const std::filesystem::path& fixture_file);
    std::vector<SearchResult> search(const std::string& query, int limit) override;

  private:
    struct Entry {
        std::string query_contains;
        std::vector<SearchResult> results;
    };
    std::vector<Entry> entries_;
};

/// Client for a JSON search endpoint: GET {url}?q={query}&limit={n}
/// returning {"results": [{title, url, snippet}]}.
class HttpSearchBackend : public SearchBackend {
  public:
    explicit HttpSearchBackend(std::string url);
    std::vector<SearchResult> search(const std::string& query, int limit) override;

  private:
    std::string url_;
};

/// Runs a party-scoped web query with a bounded retry budget. Exhausting
/// the budget rethrows SearchError; the caller degrades the record to
/// Setting-0 rendering.
std::vector<RetrievedSnippet> web_search(SearchBackend& backend, const std::string& party,
                                         const std::string& query, int limit,
                                         int max_attempts = 3);

}  // namespace vaaudit
