#pragma once
// Executes Get/Post actions against a FHIR endpoint. Non-2xx responses are
// observations the agent must see and recover from, never harness errors;
// only transport-level failures (after retries) raise.

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "selsm/model.hpp"
#include "selsm/sandbox.hpp"

namespace selsm {

struct GatewayConfig {
    std::string base_url;
    int timeout_ms = 10000;
    int max_retries = 2;
    int retry_backoff_ms = 100;

    void validate() const {
        if (timeout_ms <= 0) throw Error("invalid-config", "gateway timeout must be > 0");
        if (max_retries < 0) throw Error("invalid-config", "gateway max_retries must be >= 0");
        if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0)
            throw Error("invalid-config", "gateway base_url is not a valid URL: " + base_url);
    }
};

inline std::string format_observation(int status, const std::string& body) {
    return "HTTP " + std::to_string(status) + "\n" + body;
}

class Gateway {
public:
    virtual ~Gateway() = default;
    // Pre: action.kind is Get or Post. Throws Error("gateway", ...) on
    // transport failure after retries.
    virtual std::string execute(const Action& action) = 0;
};

namespace detail {

// Minimal request-target encoding: spaces and non-printable bytes only, so
// query values like "name=Alice Smith" survive the wire.
inline std::string encode_target(const std::string& path) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(path.size());
    for (unsigned char c : path) {
        if (c <= 0x20 || c >= 0x7f || c == '"' || c == '<' || c == '>' || c == '{' ||
            c == '}' || c == '|' || c == '\\' || c == '^' || c == '`') {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xf]);
        } else {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

inline void require_executable(const Action& action) {
    if (action.kind != ActionKind::Get && action.kind != ActionKind::Post)
        throw Error("gateway", "execute requires a Get or Post action");
    if (!action.url.has_value()) throw Error("gateway", "action has no url");
}

}  // namespace detail

class HttpGateway : public Gateway {
public:
    explicit HttpGateway(GatewayConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    std::string execute(const Action& action) override {
        detail::require_executable(action);
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
        client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
        const std::string target = detail::encode_target(*action.url);
        for (int attempt = 0;; ++attempt) {
            httplib::Result res =
                action.kind == ActionKind::Get
                    ? client.Get(target)
                    : client.Post(target, action.payload->dump(), "application/json");
            if (res) return format_observation(res->status, res->body);
            if (attempt >= config_.max_retries)
                throw Error("gateway", "transport failure after " +
                                           std::to_string(attempt + 1) + " attempts: " +
                                           httplib::to_string(res.error()));
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.retry_backoff_ms));
        }
    }

private:
    GatewayConfig config_;
};

// Direct in-process execution against a SandboxEngine; same observation
// format as the HTTP path.
class EngineGateway : public Gateway {
public:
    explicit EngineGateway(SandboxEngine& engine) : engine_(engine) {}

    std::string execute(const Action& action) override {
        detail::require_executable(action);
        const EngineResponse r =
            engine_.handle(action.kind == ActionKind::Get ? "GET" : "POST", *action.url,
                           action.payload.has_value() ? action.payload->dump() : std::string{});
        return format_observation(r.status, r.body.dump());
    }

private:
    SandboxEngine& engine_;
};

}  // namespace selsm
