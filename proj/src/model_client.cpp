#include "vaaudit/model_client.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vaaudit/util.hpp"

namespace vaaudit {

using nlohmann::json;

std::string to_string(PrefixMode mode) {
    return mode == PrefixMode::AssistantTurn ? "assistant-turn" : "user-instruction";
}

std::string cache_digest(const ChatRequest& request) {
    std::ostringstream blob;
    blob << request.model_id << '\x1f' << request.temperature << '\x1f' << request.max_tokens
         << '\x1f' << request.response_prefix << '\x1f';
    for (const auto& turn : request.turns) {
        blob << to_string(turn.role) << '\x1e' << turn.text << '\x1e';
    }
    return content_digest(blob.str());
}

// ---------------------------------------------------------------------------
// HTTP backend

namespace {

std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("bad endpoint url: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

json turns_to_messages(const ChatRequest& request, PrefixMode prefix_mode) {
    json messages = json::array();
    for (const auto& turn : request.turns) {
        messages.push_back({{"role", to_string(turn.role)}, {"content", turn.text}});
    }
    if (!request.response_prefix.empty()) {
        if (prefix_mode == PrefixMode::AssistantTurn) {
            messages.push_back({{"role", "assistant"}, {"content", request.response_prefix}});
        } else {
            // No assistant-continuation support: instruct instead.
            std::string& last = messages.back()["content"].get_ref<std::string&>();
            last += "\n\nBegin your response with: \"" + request.response_prefix + "\"";
        }
    }
    return messages;
}

}  // namespace

HttpChatBackend::HttpChatBackend(std::string endpoint_url, std::string auth_token)
    : auth_token_(std::move(auth_token)) {
    auto [base, path] = split_url(endpoint_url);
    base_ = base;
    path_ = path;
}

std::string HttpChatBackend::complete(const ChatRequest& request, PrefixMode prefix_mode) {
    httplib::Client client(base_);
    client.set_read_timeout(300, 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (!auth_token_.empty()) headers.insert({"Authorization", "Bearer " + auth_token_});
    json body{{"model", request.model_id},
              {"messages", turns_to_messages(request, prefix_mode)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw TransportError("chat endpoint unreachable: " + base_ + path_);
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("chat endpoint returned " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw ChatError("chat endpoint returned " + std::to_string(res->status) + ": " + res->body);
    }
    try {
        json parsed = json::parse(res->body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ChatError("malformed chat response: " + std::string(e.what()));
    }
}

// ---------------------------------------------------------------------------
// Deterministic mock

namespace {

const char* stance_phrase(char letter) {
    switch (letter) {
        case 'a': return "completely disagrees with";
        case 'b': return "tends to disagree with";
        case 'c': return "is neutral toward";
        case 'd': return "tends to agree with";
        default: return "completely agrees with";
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string DeterministicMockBackend::complete(const ChatRequest& request, PrefixMode) {
    calls_++;
    if (ends_with(request.response_prefix, "option (")) {
        std::uint64_t h = fnv1a_64(cache_digest(request));
        char letter = static_cast<char>('a' + (h % 5));
        std::ostringstream out;
        out << letter << ") - the party " << stance_phrase(letter)
            << " the statement based on its stated program and public record.";
        return out.str();
    }
    if (!request.response_prefix.empty()) {
        return " has recently emphasized its established positions in national and EU politics, "
               "prioritizing its long-standing program commitments in economic, social and "
               "European policy debates.";
    }
    if (!request.turns.empty()) {
        const std::string& text = request.turns.back().text;
        auto pos = text.find("to English: ");
        if (pos != std::string::npos) {
            return "[translated] " + text.substr(pos + std::string("to English: ").size());
        }
    }
    return "Understood.";
}

// ---------------------------------------------------------------------------
// Cache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::lookup(const ChatRequest& request) const {
    auto path = dir_ / (cache_digest(request) + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        json j = json::parse(in);
        // Collision guard: the stored fingerprint must match the request.
        if (j.value("model", "") != request.model_id) return std::nullopt;
        return j.at("text").get<std::string>();
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

void ResponseCache::store(const ChatRequest& request, const std::string& text) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    auto digest = cache_digest(request);
    auto path = dir_ / (digest + ".json");
    auto tmp = dir_ / (digest + ".tmp");
    json j{{"model", request.model_id}, {"text", text}};
    write_file(tmp.string(), j.dump());
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Client

ChatClient::ChatClient(ChatBackend& backend, ChatClientConfig config)
    : backend_(backend), config_(std::move(config)) {
    if (config_.cache_dir) cache_ = std::make_unique<ResponseCache>(*config_.cache_dir);
}

ChatRequest ChatClient::make_request(const std::vector<Turn>& turns,
                                     const std::string& prefix) const {
    if (turns.empty()) throw ChatError("chat request needs at least one turn");
    return ChatRequest{config_.model_id, turns, prefix, config_.temperature, config_.max_tokens};
}

std::string ChatClient::complete_with_retry(const ChatRequest& request) {
    int attempts = std::max(1, config_.retry.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            return backend_.complete(request, config_.prefix_mode);
        } catch (const TransportError& e) {
            if (attempt >= attempts) {
                throw ChatError("transport failure after " + std::to_string(attempt) +
                                " attempts: " + e.what());
            }
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry.base_delay_ms * (1L << (attempt - 1))));
        }
    }
}

namespace {

std::string with_prefix(const std::string& prefix, const std::string& completion) {
    if (prefix.empty() || completion.rfind(prefix, 0) == 0) return completion;
    return prefix + completion;
}

}  // namespace

ChatResponse ChatClient::chat(const std::vector<Turn>& turns, const std::string& response_prefix) {
    ChatRequest request = make_request(turns, response_prefix);
    if (cache_) {
        if (auto hit = cache_->lookup(request)) {
            return ChatResponse{*hit, config_.model_id, true, 0};
        }
    }
    auto start = std::chrono::steady_clock::now();
    std::string completion = complete_with_retry(request);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    std::string text = with_prefix(response_prefix, completion);
    if (text.empty()) throw ChatError("chat endpoint returned an empty completion");
    if (cache_) cache_->store(request, text);
    return ChatResponse{text, config_.model_id, false, elapsed};
}

StagedResult ChatClient::run_staged(const std::vector<Dialogue>& stages) {
    StagedResult result;
    std::vector<Turn> history;
    for (size_t i = 0; i < stages.size(); ++i) {
        // Stage dialogues after the first carry only their new turns; the
        // accumulated history already holds the system prompt and every
        // prior question-answer pair.
        for (const auto& turn : stages[i].turns) history.push_back(turn);
        try {
            ChatResponse response = chat(history, stages[i].response_prefix);
            history.push_back(Turn{Role::Assistant, response.text});
            result.responses.push_back(std::move(response));
        } catch (const std::exception& e) {
            result.failed_stage = static_cast<int>(i + 1);
            result.error = "stage " + std::to_string(i + 1) + " failed: " + e.what();
            return result;
        }
    }
    return result;
}

std::string render_translation_prompt(const std::string& text,
                                      const std::string& source_language) {
    return "You are a helpful professional translation assistant. The translations must be "
           "faithful and accurate at a professional level meeting the highest European Commission "
           "official standards. Translate the following text from " +
           source_language + " to English: " + text;
}

std::string ChatClient::translate(const std::string& text, const std::string& source_language) {
    if (trim(text).empty()) throw std::invalid_argument("translate: empty text");
    if (trim(source_language).empty()) {
        throw std::invalid_argument("translate: empty source language");
    }
    std::vector<Turn> turns = {Turn{Role::User, render_translation_prompt(text, source_language)}};
    return chat(turns, "").text;
}

}  // namespace vaaudit
