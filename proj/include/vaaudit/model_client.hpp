#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vaaudit/prompting.hpp"

namespace vaaudit {

struct ChatRequest {
    std::string model_id;
    std::vector<Turn> turns;
    std::string response_prefix;
    double temperature = 0.0;
    int max_tokens = 512;

    bool operator==(const ChatRequest&) const = default;
};

struct ChatResponse {
    std::string text;  // completion including the echoed prefix
    std::string model_id;
    bool cached = false;
    long latency_ms = 0;
};

/// Content hash of (model_id, turns, response_prefix, temperature,
/// max_tokens). Equal requests produce equal digests; changing any turn
/// byte, the temperature or the model changes the digest.
std::string cache_digest(const ChatRequest& request);

/// Transient transport failure; retried with exponential backoff.
class TransportError : public std::runtime_error {
  public:
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

/// Terminal failure after the retry budget is exhausted (or a
/// non-retryable protocol error). Carried into the audit record as an
/// unanswered item.
class ChatError : public std::runtime_error {
  public:
    explicit ChatError(const std::string& what) : std::runtime_error(what) {}
};

/// How the response prefix travels on the wire.
enum class PrefixMode {
    AssistantTurn,    // partial assistant message, server continues it
    UserInstruction,  // appended to the final user turn as an instruction
};

std::string to_string(PrefixMode mode);

/// Produces the raw completion (without the prefix) for one request.
class ChatBackend {
  public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request, PrefixMode prefix_mode) = 0;
};

/// Talks the common JSON chat-completion wire protocol: POST a body with
/// model, messages [{role, content}], temperature and max_tokens; read
/// choices[0].message.content back.
class HttpChatBackend : public ChatBackend {
  public:
    HttpChatBackend(std::string endpoint_url, std::string auth_token = "");
    std::string complete(const ChatRequest& request, PrefixMode prefix_mode) override;

  private:
    std::string base_;
    std::string path_;
    std::string auth_token_;
};

/// Wraps a std::function; test scripts and small tools compose on this.
class FunctionChatBackend : public ChatBackend {
  public:
    using Fn = std::function<std::string(const ChatRequest&, PrefixMode)>;
    explicit FunctionChatBackend(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const ChatRequest& request, PrefixMode prefix_mode) override {
        return fn_(request, prefix_mode);
    }

  private:
    Fn fn_;
};

/// Offline stand-in for a chat endpoint. Completions are a pure function
/// of the request bytes: option questions get a deterministic option
/// letter, stage questions a fixed summary, translation prompts an echo.
/// Counts invocations so tests can assert cache behavior.
class DeterministicMockBackend : public ChatBackend {
  public:
    std::string complete(const ChatRequest& request, PrefixMode prefix_mode) override;
    long call_count() const { return calls_; }

  private:
    std::atomic<long> calls_{0};
};

/// Disk-backed response cache keyed by request digest. Stores the request
/// fingerprint next to the response so a digest collision is detected and
/// treated as a miss. Reads are concurrent; writes serialize.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path dir);
    std::optional<std::string> lookup(const ChatRequest& request) const;
    void store(const ChatRequest& request, const std::string& text);

  private:
    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

struct RetryPolicy {
    int max_attempts = 3;
    int base_delay_ms = 200;
};

struct ChatClientConfig {
    std::string model_id;
    double temperature = 0.0;
    int max_tokens = 512;
    PrefixMode prefix_mode = PrefixMode::AssistantTurn;
    RetryPolicy retry;
    std::optional<std::filesystem::path> cache_dir;
};

/// Result of a staged conversation. A failed stage aborts the remainder;
/// `failed_stage` names it (1-based) and `error` carries the message.
struct StagedResult {
    std::vector<ChatResponse> responses;
    std::optional<int> failed_stage;
    std::string error;

    bool ok() const { return !failed_stage.has_value(); }
};

/// Drives chat completions with caching and bounded retries.
class ChatClient {
  public:
    ChatClient(ChatBackend& backend, ChatClientConfig config);

    /// Returns the completion with the prefix echoed at the front. Cache
    /// hits return the stored response and perform zero backend calls.
    ChatResponse chat(const std::vector<Turn>& turns, const std::string& response_prefix);

    /// Executes dialogue stages sequentially. Stage n's request history
    /// contains the stage 1..n-1 question-answer pairs verbatim.
    StagedResult run_staged(const std::vector<Dialogue>& stages);

    /// Sends the fixed translation instruction with the source language
    /// and text substituted; returns the completion. Rejects empty text
    /// before any network call.
    std::string translate(const std::string& text, const std::string& source_language);

    const ChatClientConfig& config() const { return config_; }

  private:
    ChatRequest make_request(const std::vector<Turn>& turns, const std::string& prefix) const;
    std::string complete_with_retry(const ChatRequest& request);

    ChatBackend& backend_;
    ChatClientConfig config_;
    std::unique_ptr<ResponseCache> cache_;
};

/// Verbatim instruction used for the dataset translation pass, with
/// {language} and {text} substituted.
std::string render_translation_prompt(const std::string& text,
                                      const std::string& source_language);

}  // namespace vaaudit
