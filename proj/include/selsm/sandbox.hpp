#pragma once
// Deterministic in-process synthetic FHIR store plus an HTTP front end.
// The engine is the single source of truth; the server is a thin wire
// adapter so the same behavior is reachable in-process and over HTTP/1.1.
//
// Supported surface: GET /{ResourceType}?{param=value...} with exact-match
// filtering on top-level fields plus `_id` and ge/le prefixes on `date`;
// POST /{ResourceType} appending a resource under a fresh id. Responses are
// FHIR-style searchset bundles.

#include <atomic>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "selsm/io.hpp"
#include "selsm/model.hpp"

namespace selsm {

struct SandboxFixture {
    std::vector<json> patients;
    std::vector<json> observations;
    std::vector<json> medication_requests;
    std::vector<json> service_requests;
    uint64_t rng_seed = 1;

    std::vector<std::string> validate() const {
        std::vector<std::string> violations;
        std::set<std::string> ids;
        auto check = [&](const std::vector<json>& resources, const char* what) {
            for (const auto& r : resources) {
                if (!r.is_object() || !r.contains("id") || !r["id"].is_string()) {
                    violations.push_back(std::string(what) + ": resource without string id");
                    continue;
                }
                const auto id = r["id"].get<std::string>();
                if (!ids.insert(id).second)
                    violations.push_back("duplicate resource id '" + id + "'");
            }
        };
        check(patients, "patients");
        check(observations, "observations");
        check(medication_requests, "medication_requests");
        check(service_requests, "service_requests");
        return violations;
    }

    std::set<std::string> patient_ids() const {
        std::set<std::string> ids;
        for (const auto& p : patients)
            if (p.contains("id") && p["id"].is_string()) ids.insert(p["id"].get<std::string>());
        return ids;
    }
};

inline void from_json(const json& j, SandboxFixture& f) {
    f = SandboxFixture{};
    f.patients = j.value("patients", std::vector<json>{});
    f.observations = j.value("observations", std::vector<json>{});
    f.medication_requests = j.value("medication_requests", std::vector<json>{});
    f.service_requests = j.value("service_requests", std::vector<json>{});
    f.rng_seed = j.value("rng_seed", uint64_t{1});
}

inline void to_json(json& j, const SandboxFixture& f) {
    j = json{{"patients", f.patients},
             {"observations", f.observations},
             {"medication_requests", f.medication_requests},
             {"service_requests", f.service_requests},
             {"rng_seed", f.rng_seed}};
}

inline SandboxFixture load_fixture(const std::string& path) {
    auto fixture = read_json_file(path).get<SandboxFixture>();
    const auto violations = fixture.validate();
    if (!violations.empty()) {
        std::string msg = path + ": invalid fixture:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw Error("invalid-fixture", msg);
    }
    return fixture;
}

struct EngineResponse {
    int status = 0;
    json body;
};

inline std::string url_decode(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && std::isxdigit((unsigned char)s[i + 1]) &&
            std::isxdigit((unsigned char)s[i + 2])) {
            out.push_back(static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16)));
            i += 2;
        } else if (s[i] == '+') {
            out.push_back(' ');
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

// Splits "/Type?k=v&k2=v2" into the resource type and decoded parameters.
struct ParsedRequestPath {
    std::string resource_type;
    std::vector<std::pair<std::string, std::string>> params;
};

inline ParsedRequestPath parse_request_path(const std::string& url) {
    ParsedRequestPath out;
    std::string path = url;
    std::string query;
    if (const size_t q = url.find('?'); q != std::string::npos) {
        path = url.substr(0, q);
        query = url.substr(q + 1);
    }
    if (!path.empty() && path.front() == '/') path.erase(0, 1);
    if (!path.empty() && path.back() == '/') path.pop_back();
    out.resource_type = url_decode(path);
    size_t pos = 0;
    while (pos < query.size()) {
        size_t amp = query.find('&', pos);
        if (amp == std::string::npos) amp = query.size();
        const std::string pair = query.substr(pos, amp - pos);
        if (!pair.empty()) {
            const size_t eq = pair.find('=');
            if (eq == std::string::npos)
                out.params.emplace_back(url_decode(pair), "");
            else
                out.params.emplace_back(url_decode(pair.substr(0, eq)),
                                        url_decode(pair.substr(eq + 1)));
        }
        pos = amp + 1;
    }
    return out;
}

class SandboxEngine {
public:
    explicit SandboxEngine(const SandboxFixture& fixture) : seed_(fixture.rng_seed) {
        store_ = {{"Patient", fixture.patients},
                  {"Observation", fixture.observations},
                  {"MedicationRequest", fixture.medication_requests},
                  {"ServiceRequest", fixture.service_requests}};
    }

    EngineResponse get(const std::string& resource_type,
                       const std::vector<std::pair<std::string, std::string>>& params) const {
        std::shared_lock lock(mu_);
        const auto it = find_collection(resource_type);
        if (it == store_.end())
            return {404, json{{"error", "unknown resource type '" + resource_type + "'"}}};
        json entries = json::array();
        for (const auto& r : it->second)
            if (matches(r, params)) entries.push_back(json{{"resource", r}});
        return {200, json{{"resourceType", "Bundle"},
                          {"total", entries.size()},
                          {"entry", entries}}};
    }

    EngineResponse post(const std::string& resource_type, const std::string& body) {
        json payload = json::parse(body, nullptr, /*allow_exceptions=*/false);
        if (payload.is_discarded() || !payload.is_object())
            return {400, json{{"error", "request body is not a JSON object"}}};
        std::unique_lock lock(mu_);
        const auto it = find_collection(resource_type);
        if (it == store_.end())
            return {404, json{{"error", "unknown resource type '" + resource_type + "'"}}};
        json resource = payload;
        resource["id"] = fresh_id(it->first);
        if (!resource.contains("resourceType")) resource["resourceType"] = it->first;
        it->second.push_back(resource);
        posted_.emplace_back("/" + it->first, resource);
        return {201, resource};
    }

    EngineResponse handle(const std::string& method, const std::string& url,
                          const std::string& body) {
        const ParsedRequestPath req = parse_request_path(url);
        if (method == "GET") return get(req.resource_type, req.params);
        if (method == "POST") return post(req.resource_type, body);
        return {405, json{{"error", "method not allowed"}}};
    }

    // True iff every assertion is satisfied by some resource accepted via
    // POST at that path (subset semantics over required field/value pairs).
    bool verify_writes(const std::vector<ExpectedWrite>& expected) const {
        std::shared_lock lock(mu_);
        for (const auto& want : expected) {
            bool found = false;
            for (const auto& [path, resource] : posted_) {
                if (path != normalize_path(want.path)) continue;
                if (contains_fields(resource, want.fields)) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        return true;
    }

    size_t posted_count() const {
        std::shared_lock lock(mu_);
        return posted_.size();
    }

private:
    static std::string normalize_path(const std::string& path) {
        return path.empty() || path.front() == '/' ? path : "/" + path;
    }

    static bool contains_fields(const json& resource, const json& fields) {
        if (!fields.is_object()) return false;
        for (auto it = fields.begin(); it != fields.end(); ++it) {
            if (!resource.contains(it.key())) return false;
            if (!json_values_match(it.value(), resource[it.key()])) return false;
        }
        return true;
    }

    static bool matches(const json& resource,
                        const std::vector<std::pair<std::string, std::string>>& params) {
        for (const auto& [key, value] : params) {
            if (key == "_id") {
                if (!resource.contains("id") || field_text(resource["id"]) != value) return false;
            } else if (key == "date") {
                if (!resource.contains("date") || !resource["date"].is_string()) return false;
                const std::string have = resource["date"].get<std::string>();
                if (value.rfind("ge", 0) == 0) {
                    if (have < value.substr(2)) return false;
                } else if (value.rfind("le", 0) == 0) {
                    if (have > value.substr(2)) return false;
                } else {
                    if (have != value) return false;
                }
            } else {
                if (!resource.contains(key) || field_text(resource[key]) != value) return false;
            }
        }
        return true;
    }

    static std::string field_text(const json& v) {
        return v.is_string() ? v.get<std::string>() : v.dump();
    }

    std::vector<std::pair<std::string, std::vector<json>>>::iterator
    find_collection(const std::string& type) {
        for (auto it = store_.begin(); it != store_.end(); ++it)
            if (it->first == type) return it;
        return store_.end();
    }

    std::vector<std::pair<std::string, std::vector<json>>>::const_iterator
    find_collection(const std::string& type) const {
        for (auto it = store_.begin(); it != store_.end(); ++it)
            if (it->first == type) return it;
        return store_.end();
    }

    std::string fresh_id(const std::string& type) {
        std::string prefix = type;
        for (auto& c : prefix) c = static_cast<char>(std::tolower((unsigned char)c));
        return prefix + "-" + std::to_string(seed_) + "-" + std::to_string(++id_counter_);
    }

    uint64_t seed_;
    uint64_t id_counter_ = 0;
    std::vector<std::pair<std::string, std::vector<json>>> store_;
    std::vector<std::pair<std::string, json>> posted_;
    mutable std::shared_mutex mu_;
};

// HTTP front end for a SandboxEngine. Listens on the given port, or picks a
// free one when port == 0.
class SandboxServer {
public:
    explicit SandboxServer(SandboxEngine& engine, int port = 0) : engine_(engine) {
        server_.Get(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
            ParsedRequestPath parsed = parse_request_path(req.path);
            for (const auto& [k, v] : req.params) parsed.params.emplace_back(k, v);
            respond(engine_.get(parsed.resource_type, parsed.params), res);
        });
        server_.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
            const ParsedRequestPath parsed = parse_request_path(req.path);
            respond(engine_.post(parsed.resource_type, req.body), res);
        });
        if (port == 0) {
            port_ = server_.bind_to_any_port("127.0.0.1");
        } else {
            if (!server_.bind_to_port("127.0.0.1", port))
                throw Error("sandbox", "cannot bind port " + std::to_string(port));
            port_ = port;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~SandboxServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    SandboxServer(const SandboxServer&) = delete;
    SandboxServer& operator=(const SandboxServer&) = delete;

    int port() const { return port_; }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    static void respond(const EngineResponse& r, httplib::Response& res) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    }

    SandboxEngine& engine_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace selsm
