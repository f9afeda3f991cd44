#pragma once
// Chat-completion and embedding services behind one wire protocol, plus the
// deterministic mock providers that make the whole pipeline hermetic:
//   - HttpChatProvider / HttpEmbeddingProvider: chat-completions style JSON
//   - ScriptedChatProvider: ordered (matcher, reply) script, file-loadable
//   - HeuristicJudgeProvider: rule-based judge emitting valid verdict JSON
//   - HashEmbedder: seeded hash-derived vectors of configurable dimension

#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "selsm/action.hpp"
#include "selsm/hash.hpp"
#include "selsm/io.hpp"
#include "selsm/model.hpp"

namespace selsm {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 0;  // 0 = provider default
};

struct ChatResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse chat(const ChatRequest& request) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One raw (un-normalized) vector per input text, order preserved.
    virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;
    virtual int dimension() const = 0;
    virtual std::string id() const = 0;
};

struct ProviderConfig {
    std::string provider = "http";  // http | mock:script | mock:judge | mock:hash
    std::string endpoint;
    std::string model;
    std::string auth_env = "SELSM_API_TOKEN";
    int timeout_ms = 30000;
    int max_retries = 2;
    int retry_backoff_ms = 200;
    int dim = 0;             // embedders: expected dimension
    uint64_t hash_seed = 1;  // mock:hash
    std::string script;      // mock:script: path to script file
    bool strict = true;
    std::optional<std::string> default_reply;
};

inline void from_json(const json& j, ProviderConfig& c) {
    c = ProviderConfig{};
    c.provider = j.value("provider", std::string("http"));
    c.endpoint = j.value("endpoint", std::string{});
    c.model = j.value("model", std::string{});
    c.auth_env = j.value("auth_env", std::string("SELSM_API_TOKEN"));
    c.timeout_ms = j.value("timeout_ms", 30000);
    c.max_retries = j.value("max_retries", 2);
    c.retry_backoff_ms = j.value("retry_backoff_ms", 200);
    c.dim = j.value("dim", 0);
    c.hash_seed = j.value("hash_seed", uint64_t{1});
    c.script = j.value("script", std::string{});
    c.strict = j.value("strict", true);
    if (j.contains("default_reply")) c.default_reply = j.at("default_reply").get<std::string>();
}

inline void to_json(json& j, const ProviderConfig& c) {
    j = json{{"provider", c.provider},       {"endpoint", c.endpoint},
             {"model", c.model},             {"auth_env", c.auth_env},
             {"timeout_ms", c.timeout_ms},   {"max_retries", c.max_retries},
             {"retry_backoff_ms", c.retry_backoff_ms}, {"dim", c.dim},
             {"hash_seed", c.hash_seed},     {"script", c.script},
             {"strict", c.strict}};
    if (c.default_reply.has_value()) j["default_reply"] = *c.default_reply;
}

// Whitespace-delimited token rule used by all mock providers; real runs use
// provider-reported usage.
inline long count_ws_tokens(const std::string& text) {
    long n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

namespace detail {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /path or /
};

inline ParsedUrl split_url(const std::string& url) {
    const size_t scheme = url.find("://");
    if (scheme == std::string::npos)
        throw Error("invalid-config", "endpoint is not a valid URL: " + url);
    const size_t path_start = url.find('/', scheme + 3);
    if (url.find('.', scheme + 3) == std::string::npos &&
        url.find(':', scheme + 3) == std::string::npos &&
        url.substr(scheme + 3, path_start - scheme - 3).empty())
        throw Error("invalid-config", "endpoint is not a valid URL: " + url);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline httplib::Headers auth_headers(const ProviderConfig& config) {
    httplib::Headers headers;
    if (!config.auth_env.empty()) {
        if (const char* token = std::getenv(config.auth_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    return headers;
}

// Retries transport-level failures only; HTTP error statuses are returned.
inline httplib::Result post_with_retries(const ProviderConfig& config, const std::string& body) {
    const ParsedUrl url = split_url(config.endpoint);
    httplib::Client client(url.base);
    client.set_connection_timeout(0, config.timeout_ms * 1000LL);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    for (int attempt = 0;; ++attempt) {
        auto res = client.Post(url.path, auth_headers(config), body, "application/json");
        if (res) return res;
        if (attempt >= config.max_retries)
            throw Error("provider", "transport failure after " +
                                        std::to_string(attempt + 1) + " attempts: " +
                                        httplib::to_string(res.error()));
        std::this_thread::sleep_for(std::chrono::milliseconds(config.retry_backoff_ms));
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Wire providers (chat-completions JSON shape)

class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
        detail::split_url(config_.endpoint);  // validate eagerly
    }

    ChatResponse chat(const ChatRequest& request) override {
        json messages = json::array();
        for (const auto& m : request.messages)
            messages.push_back(json{{"role", m.role}, {"content", m.content}});
        json body = json{{"model", request.model.empty() ? config_.model : request.model},
                         {"messages", messages},
                         {"temperature", request.temperature}};
        if (request.max_tokens > 0) body["max_tokens"] = request.max_tokens;

        auto res = detail::post_with_retries(config_, body.dump());
        if (res->status < 200 || res->status >= 300)
            throw Error("provider", "HTTP " + std::to_string(res->status) + ": " +
                                        res->body.substr(0, 200));
        try {
            const json reply = json::parse(res->body);
            ChatResponse out;
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            if (reply.contains("usage")) {
                out.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
                out.completion_tokens = reply["usage"].value("completion_tokens", 0L);
            }
            return out;
        } catch (const json::exception& e) {
            throw Error("provider", std::string("malformed chat response: ") + e.what());
        }
    }

private:
    ProviderConfig config_;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(ProviderConfig config) : config_(std::move(config)) {
        detail::split_url(config_.endpoint);
        if (config_.dim <= 0)
            throw Error("invalid-config", "http embedder requires a positive 'dim'");
    }

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw Error("provider", "embed requires at least one text");
        json body = json{{"model", config_.model}, {"input", texts}};
        auto res = detail::post_with_retries(config_, body.dump());
        if (res->status < 200 || res->status >= 300)
            throw Error("provider", "HTTP " + std::to_string(res->status) + ": " +
                                        res->body.substr(0, 200));
        try {
            const json reply = json::parse(res->body);
            std::vector<std::vector<float>> out;
            for (const auto& item : reply.at("data"))
                out.push_back(item.at("embedding").get<std::vector<float>>());
            if (out.size() != texts.size())
                throw Error("provider", "embedding count mismatch");
            for (const auto& v : out)
                if (static_cast<int>(v.size()) != config_.dim)
                    throw Error("provider", "embedding dimension mismatch: got " +
                                                std::to_string(v.size()) + ", expected " +
                                                std::to_string(config_.dim));
            return out;
        } catch (const json::exception& e) {
            throw Error("provider", std::string("malformed embedding response: ") + e.what());
        }
    }

    int dimension() const override { return config_.dim; }
    std::string id() const override { return config_.model; }

private:
    ProviderConfig config_;
};

// ---------------------------------------------------------------------------
// Scripted chat provider

struct ScriptEntry {
    std::vector<std::string> contains;  // all must occur in the rendered request
    std::vector<std::string> absent;    // none may occur
    std::string reply;
    int uses = 0;  // remaining uses; 0 = unlimited
};

inline void from_json(const json& j, ScriptEntry& e) {
    e = ScriptEntry{};
    e.contains = j.value("contains", std::vector<std::string>{});
    e.absent = j.value("absent", std::vector<std::string>{});
    e.reply = j.at("reply").get<std::string>();
    e.uses = j.value("uses", 0);
}

class ScriptedChatProvider : public ChatProvider {
public:
    ScriptedChatProvider(std::vector<ScriptEntry> script, bool strict,
                         std::optional<std::string> default_reply = std::nullopt)
        : script_(std::move(script)), strict_(strict), default_reply_(std::move(default_reply)) {
        if (script_.empty()) throw Error("scripted-provider", "script must be non-empty");
    }

    static std::shared_ptr<ScriptedChatProvider> from_file(const ProviderConfig& config) {
        const json j = read_json_file(config.script);
        if (!j.is_array())
            throw Error("invalid-config", config.script + ": script must be a JSON array");
        return std::make_shared<ScriptedChatProvider>(j.get<std::vector<ScriptEntry>>(),
                                                      config.strict, config.default_reply);
    }

    ChatResponse chat(const ChatRequest& request) override {
        std::string haystack;
        for (const auto& m : request.messages) {
            haystack += m.content;
            haystack += '\n';
        }
        std::lock_guard<std::mutex> lock(mu_);
        for (auto& entry : script_) {
            if (entry.uses < 0) continue;  // exhausted
            bool hit = true;
            for (const auto& s : entry.contains)
                if (haystack.find(s) == std::string::npos) { hit = false; break; }
            if (hit)
                for (const auto& s : entry.absent)
                    if (haystack.find(s) != std::string::npos) { hit = false; break; }
            if (!hit) continue;
            if (entry.uses > 0 && --entry.uses == 0) entry.uses = -1;
            return respond(haystack, entry.reply);
        }
        if (!strict_ && default_reply_.has_value()) return respond(haystack, *default_reply_);
        throw Error("scripted-provider", "no script entry matches the request");
    }

private:
    ChatResponse respond(const std::string& haystack, const std::string& reply) const {
        ChatResponse out;
        out.text = reply;
        out.prompt_tokens = count_ws_tokens(haystack);
        out.completion_tokens = count_ws_tokens(reply);
        return out;
    }

    std::vector<ScriptEntry> script_;
    bool strict_;
    std::optional<std::string> default_reply_;
    std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Heuristic judge mock

// Marker the judge prompt places before the action under evaluation; the
// mock judge keys off it.
inline constexpr const char* kJudgeActionMarker = "ACTION TO EVALUATE:";

// Deterministic stand-in for the judge model: labels a step negative when the
// action is unparseable or its round ended in an HTTP error, positive
// otherwise, and emits a canned entity-agnostic skill for the action kind.
class HeuristicJudgeProvider : public ChatProvider {
public:
    ChatResponse chat(const ChatRequest& request) override {
        std::string prompt;
        for (const auto& m : request.messages) {
            prompt += m.content;
            prompt += '\n';
        }
        const std::string action_text = section_after_marker(prompt);
        const Action action = parse_action(action_text);
        const int status = last_response_status(prompt);
        const bool negative = action.kind == ActionKind::Invalid || status >= 400;

        json verdict;
        verdict["label"] = negative ? "negative" : "positive";
        fill_skill(verdict, action, status, negative);

        ChatResponse out;
        out.text = verdict.dump();
        out.prompt_tokens = count_ws_tokens(prompt);
        out.completion_tokens = count_ws_tokens(out.text);
        return out;
    }

private:
    static std::string section_after_marker(const std::string& prompt) {
        const size_t pos = prompt.rfind(kJudgeActionMarker);
        if (pos == std::string::npos) return prompt;
        return prompt.substr(pos + std::string(kJudgeActionMarker).size());
    }

    // Observations are rendered as "HTTP <status>\n<body>"; find the status of
    // the latest round's response.
    static int last_response_status(const std::string& prompt) {
        const size_t pos = prompt.rfind("RESPONSE: HTTP ");
        if (pos == std::string::npos) return 0;
        return std::atoi(prompt.c_str() + pos + 15);
    }

    static void fill_skill(json& verdict, const Action& action, int status, bool negative) {
        const bool date_query =
            action.url.has_value() && action.url->find("date=") != std::string::npos;
        std::string category = "api_protocol";
        switch (action.kind) {
            case ActionKind::Get:
                category = date_query ? "temporal_reasoning" : "parameter_mapping";
                break;
            case ActionKind::Post: category = "api_protocol"; break;
            case ActionKind::Finish: category = "data_extraction"; break;
            case ActionKind::Invalid: category = "api_protocol"; break;
        }
        verdict["category"] = category;
        if (negative) {
            verdict["scenario"] =
                "An interaction step failed, either because the reply did not follow the "
                "required action grammar or because the server rejected the request.";
            verdict["generalized_logic"] =
                status >= 400
                    ? "Treat a non-success status as a signal to re-check the resource type and "
                      "search parameters before retrying, instead of repeating the same request."
                    : "Every reply must be a single well-formed action; free-form prose cannot "
                      "be executed and terminates the workflow.";
            verdict["canonical_example"] =
                "After a not-found response to a search, correct the resource name and re-issue "
                "the search with the same filters.";
            verdict["error_avoidance"] =
                "Never invent resource types or endpoints; when a request fails, read the error "
                "body before acting again.";
        } else {
            switch (action.kind) {
                case ActionKind::Get:
                    verdict["scenario"] =
                        "Retrieving clinical records when the request narrows results "
                        "server-side.";
                    verdict["generalized_logic"] =
                        date_query
                            ? "Map temporal phrases in the task to date-range filters so only "
                              "the relevant time window is returned."
                            : "Map each entity mentioned in the task to the matching search "
                              "parameter so filtering happens server-side.";
                    verdict["canonical_example"] =
                        date_query
                            ? "A request for recent results becomes a search with a "
                              "greater-or-equal date filter on the relevant date field."
                            : "A request about a named person becomes a search with a name "
                              "parameter equal to that name.";
                    verdict["error_avoidance"] =
                        "Do not fetch whole collections and filter by hand; rely on search "
                        "parameters.";
                    break;
                case ActionKind::Post:
                    verdict["scenario"] =
                        "Creating a clinical resource through a write endpoint.";
                    verdict["generalized_logic"] =
                        "Build the payload with every field the task requires, keyed exactly as "
                        "the target resource expects, and submit it to the matching resource "
                        "collection.";
                    verdict["canonical_example"] =
                        "Recording a measurement posts a payload carrying the subject, the code "
                        "of the measurement and its value.";
                    verdict["error_avoidance"] =
                        "Do not omit required payload fields or post to a mismatched resource "
                        "collection.";
                    break;
                case ActionKind::Finish:
                    verdict["scenario"] =
                        "Concluding a task once the gathered observations answer the request.";
                    verdict["generalized_logic"] =
                        "Extract the answer from the latest relevant response and return it as "
                        "a final answer array instead of issuing further calls.";
                    verdict["canonical_example"] =
                        "After a search returns the requested value, finish with that value as "
                        "the single answer element.";
                    verdict["error_avoidance"] =
                        "Do not keep querying after the answer is already present in the "
                        "accumulated state.";
                    break;
                case ActionKind::Invalid: break;  // unreachable: invalid implies negative
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Hash embedder mock

// Vectors drawn from a splitmix stream seeded by a hash of the text: cheap,
// deterministic, dimension-flexible and adversarially unstructured.
class HashEmbedder : public EmbeddingProvider {
public:
    explicit HashEmbedder(int dim = 256, uint64_t seed = 1) : dim_(dim), seed_(seed) {
        if (dim_ <= 0) throw Error("invalid-config", "hash embedder dim must be positive");
    }

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw Error("provider", "embed requires at least one text");
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        const uint64_t seed_mix = SplitMix64(seed_).next();
        for (const auto& text : texts) {
            SplitMix64 rng(fnv1a64(text) ^ seed_mix);
            std::vector<float> v(static_cast<size_t>(dim_));
            for (auto& x : v) x = static_cast<float>(rng.next_symmetric());
            out.push_back(std::move(v));
        }
        return out;
    }

    int dimension() const override { return dim_; }

    std::string id() const override {
        return "mock-hash-v1:d" + std::to_string(dim_) + ":s" + std::to_string(seed_);
    }

private:
    int dim_;
    uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Factory

inline std::shared_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config) {
    if (config.provider == "http") return std::make_shared<HttpChatProvider>(config);
    if (config.provider == "mock:script") return ScriptedChatProvider::from_file(config);
    if (config.provider == "mock:judge") return std::make_shared<HeuristicJudgeProvider>();
    throw Error("invalid-config", "unknown chat provider '" + config.provider + "'");
}

inline std::shared_ptr<EmbeddingProvider> make_embedding_provider(const ProviderConfig& config) {
    if (config.provider == "http") return std::make_shared<HttpEmbeddingProvider>(config);
    if (config.provider == "mock:hash")
        return std::make_shared<HashEmbedder>(config.dim > 0 ? config.dim : 256,
                                              config.hash_seed);
    throw Error("invalid-config", "unknown embedding provider '" + config.provider + "'");
}

}  // namespace selsm
