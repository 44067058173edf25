#include "vaaudit/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vaaudit/dataset.hpp"
#include "vaaudit/util.hpp"

namespace vaaudit {

using nlohmann::json;

namespace {

constexpr size_t kMinParagraphChars = 200;
constexpr size_t kMaxParagraphChars = 2000;

std::string normalize_block(const std::string& block) {
    std::string s;
    s.reserve(block.size());
    for (char c : block) {
        if (c == '\r') continue;
        s.push_back(c);
    }
    return trim(s);
}

// Sentence boundary: '.', '!' or '?' followed by whitespace. Returns the
// index just past the punctuation, or npos.
size_t sentence_boundary_near(const std::string& text, size_t target) {
    auto is_boundary = [&](size_t i) {
        if (i + 1 >= text.size()) return false;
        char c = text[i];
        return (c == '.' || c == '!' || c == '?') &&
               std::isspace(static_cast<unsigned char>(text[i + 1]));
    };
    for (size_t delta = 0; delta < text.size(); ++delta) {
        if (target >= delta && target - delta > 0 && is_boundary(target - delta)) {
            return target - delta + 1;
        }
        if (target + delta < text.size() && is_boundary(target + delta)) {
            return target + delta + 1;
        }
    }
    return std::string::npos;
}

void split_long(const std::string& text, std::vector<std::string>& out) {
    std::string rest = text;
    while (rest.size() > kMaxParagraphChars) {
        size_t cut = sentence_boundary_near(rest, kMaxParagraphChars);
        if (cut == std::string::npos || cut == 0 || cut >= rest.size()) {
            cut = kMaxParagraphChars;
        }
        out.push_back(trim(rest.substr(0, cut)));
        rest = trim(rest.substr(cut));
        if (rest.empty()) return;
    }
    if (!rest.empty()) out.push_back(rest);
}

}  // namespace

std::vector<CorpusParagraph> split_manifesto(const std::string& party_key,
                                             const std::string& raw) {
    // Blank lines delimit blocks.
    std::vector<std::string> blocks;
    std::string current;
    std::istringstream in(raw);
    std::string line;
    auto flush = [&]() {
        std::string b = normalize_block(current);
        if (!b.empty()) blocks.push_back(std::move(b));
        current.clear();
    };
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            flush();
        } else {
            if (!current.empty()) current += "\n";
            current += line;
        }
    }
    flush();

    // Merge short blocks forward into the next one.
    std::vector<std::string> merged;
    std::string pending;
    for (auto& block : blocks) {
        if (!pending.empty()) {
            block = pending + "\n" + block;
            pending.clear();
        }
        if (block.size() < kMinParagraphChars) {
            pending = block;
        } else {
            merged.push_back(block);
        }
    }
    if (!pending.empty()) {
        // A short tail joins the last full paragraph when one exists.
        if (!merged.empty()) {
            merged.back() += "\n" + pending;
        } else {
            merged.push_back(pending);
        }
    }

    std::vector<std::string> sized;
    for (const auto& block : merged) split_long(block, sized);

    std::vector<CorpusParagraph> out;
    out.reserve(sized.size());
    int index = 0;
    for (auto& text : sized) {
        out.push_back(CorpusParagraph{party_key, index++, std::move(text)});
    }
    return out;
}

std::vector<CorpusParagraph> load_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw RetrievalError("corpus directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<CorpusParagraph> corpus;
    for (const auto& file : files) {
        auto paras = split_manifesto(file.stem().string(), read_file(file.string()));
        corpus.insert(corpus.end(), paras.begin(), paras.end());
    }
    return corpus;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        bool word = std::isalnum(c) || c >= 0x80;
        if (word) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

std::map<std::string, int> term_counts(const std::string& text) {
    std::map<std::string, int> counts;
    for (const auto& t : tokenize(text)) counts[t]++;
    return counts;
}

// Smoothed inverse document frequency over one party partition.
double idf(int doc_count, int df) {
    return std::log((doc_count + 1.0) / (df + 1.0)) + 1.0;
}

std::map<std::string, double> tfidf_vector(const std::map<std::string, int>& counts,
                                           const std::map<std::string, int>& doc_freq,
                                           int doc_count) {
    std::map<std::string, double> vec;
    for (const auto& [term, tf] : counts) {
        int df = 0;
        auto it = doc_freq.find(term);
        if (it != doc_freq.end()) df = it->second;
        vec[term] = tf * idf(doc_count, df);
    }
    return vec;
}

double cosine_sparse(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, w] : a) {
        na += w * w;
        auto it = b.find(t);
        if (it != b.end()) dot += w * it->second;
    }
    for (const auto& [t, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_dense(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

Index build_lexical_index(const std::vector<CorpusParagraph>& corpus) {
    Index index;
    index.backend_id = "lexical";
    for (const auto& p : corpus) index.partitions[p.party].paragraphs.push_back(p);
    for (auto& [party, partition] : index.partitions) {
        std::sort(partition.paragraphs.begin(), partition.paragraphs.end(),
                  [](const CorpusParagraph& a, const CorpusParagraph& b) {
                      return a.index < b.index;
                  });
        auto& df = index.doc_freq[party];
        std::vector<std::map<std::string, int>> counts;
        counts.reserve(partition.paragraphs.size());
        for (const auto& p : partition.paragraphs) {
            counts.push_back(term_counts(p.text));
            for (const auto& [term, _] : counts.back()) df[term]++;
        }
        int n = static_cast<int>(partition.paragraphs.size());
        for (const auto& c : counts) partition.sparse.push_back(tfidf_vector(c, df, n));
    }
    return index;
}

Index build_embedding_index(const std::vector<CorpusParagraph>& corpus,
                            EmbeddingBackend& backend) {
    Index index;
    index.backend_id = backend.id();
    for (const auto& p : corpus) index.partitions[p.party].paragraphs.push_back(p);
    constexpr size_t kBatch = 16;
    for (auto& [party, partition] : index.partitions) {
        std::sort(partition.paragraphs.begin(), partition.paragraphs.end(),
                  [](const CorpusParagraph& a, const CorpusParagraph& b) {
                      return a.index < b.index;
                  });
        for (size_t start = 0; start < partition.paragraphs.size(); start += kBatch) {
            size_t end = std::min(start + kBatch, partition.paragraphs.size());
            std::vector<std::string> texts;
            for (size_t i = start; i < end; ++i) texts.push_back(partition.paragraphs[i].text);
            std::vector<std::vector<double>> vectors;
            try {
                vectors = backend.embed(texts);
            } catch (const std::exception& e) {
                throw RetrievalError("embedding failed for party '" + party + "' paragraphs " +
                                     std::to_string(start) + ".." + std::to_string(end - 1) + ": " +
                                     e.what());
            }
            if (vectors.size() != texts.size()) {
                throw RetrievalError("embedding backend returned " +
                                     std::to_string(vectors.size()) + " vectors for " +
                                     std::to_string(texts.size()) + " texts (party '" + party +
                                     "' paragraphs " + std::to_string(start) + ".." +
                                     std::to_string(end - 1) + ")");
            }
            for (auto& v : vectors) partition.dense.push_back(std::move(v));
        }
    }
    return index;
}

namespace {

std::vector<RetrievedSnippet> rank_and_take(const IndexPartition& partition,
                                            const std::vector<double>& scores,
                                            const std::string& party, int k) {
    std::vector<size_t> order(scores.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return partition.paragraphs[a].index < partition.paragraphs[b].index;
    });

    size_t take = std::min<size_t>(static_cast<size_t>(k), order.size());
    std::vector<RetrievedSnippet> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        const CorpusParagraph& p = partition.paragraphs[order[i]];
        out.push_back(RetrievedSnippet{
            party + " manifesto, paragraph " + std::to_string(p.index), p.text, scores[order[i]],
            party});
    }
    return out;
}

const IndexPartition& partition_for(const Index& index, const std::string& party, int k) {
    if (k < 1) throw RetrievalError("k must be >= 1");
    auto it = index.partitions.find(party);
    if (it == index.partitions.end()) {
        throw RetrievalError("no index partition for party '" + party + "'");
    }
    return it->second;
}

}  // namespace

std::vector<RetrievedSnippet> retrieve(const Index& index, const std::string& party,
                                       const std::string& query, int k) {
    const IndexPartition& partition = partition_for(index, party, k);
    if (index.backend_id != "lexical") {
        throw RetrievalError("index built with backend '" + index.backend_id +
                             "' needs the embedding-backend retrieve overload");
    }
    const auto& df = index.doc_freq.at(party);
    int n = static_cast<int>(partition.paragraphs.size());
    auto qvec = tfidf_vector(term_counts(query), df, n);
    std::vector<double> scores(partition.paragraphs.size(), 0.0);
    for (size_t i = 0; i < partition.sparse.size(); ++i) {
        scores[i] = cosine_sparse(qvec, partition.sparse[i]);
    }
    return rank_and_take(partition, scores, party, k);
}

std::vector<RetrievedSnippet> retrieve(const Index& index, const std::string& party,
                                       const std::string& query, int k,
                                       EmbeddingBackend& backend) {
    const IndexPartition& partition = partition_for(index, party, k);
    if (backend.id() != index.backend_id) {
        throw RetrievalError("index built with backend '" + index.backend_id +
                             "' queried with '" + backend.id() + "'");
    }
    auto qvecs = backend.embed({query});
    if (qvecs.size() != 1) throw RetrievalError("query embedding returned no vector");
    std::vector<double> scores(partition.paragraphs.size(), 0.0);
    for (size_t i = 0; i < partition.dense.size(); ++i) {
        scores[i] = cosine_dense(qvecs[0], partition.dense[i]);
    }
    return rank_and_take(partition, scores, party, k);
}

std::string format_snippets(const Party& party, const std::vector<RetrievedSnippet>& snippets) {
    if (snippets.empty()) throw RetrievalError("cannot format an empty snippet list");
    std::ostringstream out;
    out << "These are relevant snippets from the official manifesto of the " << party.origin << " "
        << party.name << " party for the European Elections 2024:";
    int n = 1;
    for (const auto& s : snippets) {
        out << "\n" << n++ << ". " << s.text;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Index serialization

std::string Index::to_json() const {
    json j;
    j["backend"] = backend_id;
    json parts = json::object();
    for (const auto& [party, partition] : partitions) {
        json p;
        json paras = json::array();
        for (const auto& para : partition.paragraphs) {
            paras.push_back({{"index", para.index}, {"text", para.text}});
        }
        p["paragraphs"] = paras;
        if (!partition.sparse.empty()) {
            json vecs = json::array();
            for (const auto& v : partition.sparse) vecs.push_back(v);
            p["sparse"] = vecs;
        }
        if (!partition.dense.empty()) p["dense"] = partition.dense;
        auto dfit = doc_freq.find(party);
        if (dfit != doc_freq.end()) p["doc_freq"] = dfit->second;
        parts[party] = p;
    }
    j["partitions"] = parts;
    return j.dump(2);
}

Index Index::from_json(const std::string& text) {
    json j = json::parse(text);
    Index index;
    index.backend_id = j.at("backend").get<std::string>();
    for (const auto& [party, p] : j.at("partitions").items()) {
        IndexPartition partition;
        for (const auto& para : p.at("paragraphs")) {
            partition.paragraphs.push_back(CorpusParagraph{
                party, para.at("index").get<int>(), para.at("text").get<std::string>()});
        }
        if (p.contains("sparse")) {
            for (const auto& v : p["sparse"]) {
                partition.sparse.push_back(v.get<std::map<std::string, double>>());
            }
        }
        if (p.contains("dense")) {
            partition.dense = p["dense"].get<std::vector<std::vector<double>>>();
        }
        if (p.contains("doc_freq")) {
            index.doc_freq[party] = p["doc_freq"].get<std::map<std::string, int>>();
        }
        index.partitions[party] = std::move(partition);
    }
    return index;
}

void Index::save(const std::filesystem::path& path) const { write_file(path.string(), to_json()); }

Index Index::load(const std::filesystem::path& path) {
    return from_json(read_file(path.string()));
}

// ---------------------------------------------------------------------------
// Embedding backend

HttpEmbeddingBackend::HttpEmbeddingBackend(std::string url, std::string model,
                                           std::string auth_token)
    : url_(std::move(url)), model_(std::move(model)), auth_token_(std::move(auth_token)) {}

std::string HttpEmbeddingBackend::id() const { return "embedding:" + model_; }

namespace {

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("bad url: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(
    const std::vector<std::string>& texts) {
    auto [base, path] = split_url(url_);
    httplib::Client client(base);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!auth_token_.empty()) headers.insert({"Authorization", "Bearer " + auth_token_});
    json body{{"input", texts}};
    if (!model_.empty()) body["model"] = model_;
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw RetrievalError("embedding endpoint unreachable: " + url_);
    if (res->status != 200) {
        throw RetrievalError("embedding endpoint returned " + std::to_string(res->status));
    }
    json parsed = json::parse(res->body);
    std::vector<std::vector<double>> out;
    for (const auto& item : parsed.at("data")) {
        out.push_back(item.at("embedding").get<std::vector<double>>());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Web search

FixtureSearchBackend::FixtureSearchBackend(const std::filesystem::path& fixture_file) {
    std::ifstream in(fixture_file);
    if (!in) throw SearchError("missing search fixture file: " + fixture_file.string());
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        Entry entry;
        entry.query_contains = j.value("query_contains", "");
        for (const auto& r : j.at("results")) {
            entry.results.push_back(SearchResult{r.at("title").get<std::string>(),
                                                 r.at("url").get<std::string>(),
                                                 r.value("snippet", "")});
        }
        entries_.push_back(std::move(entry));
    }
}

std::vector<SearchResult> FixtureSearchBackend::search(const std::string& query, int limit) {
    for (const auto& entry : entries_) {
        if (entry.query_contains.empty() || query.find(entry.query_contains) != std::string::npos) {
            std::vector<SearchResult> out = entry.results;
            if (static_cast<int>(out.size()) > limit) out.resize(static_cast<size_t>(limit));
            return out;
        }
    }
    return {};
}

HttpSearchBackend::HttpSearchBackend(std::string url) : url_(std::move(url)) {}

std::vector<SearchResult> HttpSearchBackend::search(const std::string& query, int limit) {
    auto [base, path] = split_url(url_);
    httplib::Client client(base);
    client.set_read_timeout(60, 0);
    httplib::Params params{{"q", query}, {"limit", std::to_string(limit)}};
    auto res = client.Get(path, params, httplib::Headers{});
    if (!res) throw SearchError("search endpoint unreachable: " + url_);
    if (res->status != 200) {
        throw SearchError("search endpoint returned " + std::to_string(res->status));
    }
    json parsed = json::parse(res->body);
    std::vector<SearchResult> out;
    for (const auto& r : parsed.at("results")) {
        out.push_back(SearchResult{r.at("title").get<std::string>(),
                                   r.at("url").get<std::string>(), r.value("snippet", "")});
        if (static_cast<int>(out.size()) >= limit) break;
    }
    return out;
}

std::vector<RetrievedSnippet> web_search(SearchBackend& backend, const std::string& party,
                                         const std::string& query, int limit, int max_attempts) {
    std::vector<SearchResult> results;
    for (int attempt = 1;; ++attempt) {
        try {
            results = backend.search(query, limit);
            break;
        } catch (const SearchError&) {
            if (attempt >= max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        }
    }
    std::vector<RetrievedSnippet> out;
    int rank = 0;
    for (const auto& r : results) {
        out.push_back(RetrievedSnippet{r.title + " (" + r.url + ")", r.snippet,
                                       1.0 / (1.0 + rank), party});
        ++rank;
    }
    return out;
}

}  // namespace vaaudit
