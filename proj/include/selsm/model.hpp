#pragma once
// Domain types shared across the pipeline: tasks, actions, trajectories,
// logical skills, step evaluations, memory records and task outcomes.
// All types are immutable value objects once constructed and carry a
// canonical JSON form (sorted keys, absent optionals omitted).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "selsm/hash.hpp"
#include "selsm/io.hpp"

namespace selsm {

// ---------------------------------------------------------------------------
// Tasks

enum class TaskCategory { Query, Action };

inline std::string to_string(TaskCategory c) {
    return c == TaskCategory::Query ? "query" : "action";
}

inline TaskCategory task_category_from_string(const std::string& s) {
    if (s == "query") return TaskCategory::Query;
    if (s == "action") return TaskCategory::Action;
    throw Error("bad-json", "unknown task category '" + s + "'");
}

// One (path, required payload fields) assertion for grading Action tasks.
struct ExpectedWrite {
    std::string path;
    json fields = json::object();

    bool operator==(const ExpectedWrite&) const = default;
};

struct GoldReference {
    std::optional<json> expected_answer;
    std::vector<ExpectedWrite> expected_writes;

    bool operator==(const GoldReference&) const = default;
};

struct ClinicalTask {
    std::string task_id;
    std::string query;
    std::string context;
    TaskCategory category = TaskCategory::Query;
    GoldReference gold;
    int min_turns = 1;

    bool operator==(const ClinicalTask&) const = default;
};

// Returns the violated invariants; empty means the task is well-formed.
inline std::vector<std::string> validate_task(const ClinicalTask& task) {
    std::vector<std::string> violations;
    if (task.task_id.empty()) violations.push_back("task_id empty");
    if (task.query.empty()) violations.push_back("query empty");
    if (task.min_turns < 1) violations.push_back("min_turns >= 1");
    if (!task.gold.expected_answer.has_value() && task.gold.expected_writes.empty())
        violations.push_back("gold reference has neither expected_answer nor expected_writes");
    return violations;
}

inline std::vector<std::string> validate_task_suite(const std::vector<ClinicalTask>& tasks) {
    std::vector<std::string> violations;
    std::vector<std::string> seen;
    for (const auto& t : tasks) {
        for (const auto& v : validate_task(t))
            violations.push_back(t.task_id + ": " + v);
        if (std::find(seen.begin(), seen.end(), t.task_id) != seen.end())
            violations.push_back("duplicate task_id '" + t.task_id + "'");
        seen.push_back(t.task_id);
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Actions and trajectories

enum class ActionKind { Get, Post, Finish, Invalid };

inline std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Get: return "get";
        case ActionKind::Post: return "post";
        case ActionKind::Finish: return "finish";
        case ActionKind::Invalid: return "invalid";
    }
    return "invalid";
}

inline ActionKind action_kind_from_string(const std::string& s) {
    if (s == "get") return ActionKind::Get;
    if (s == "post") return ActionKind::Post;
    if (s == "finish") return ActionKind::Finish;
    if (s == "invalid") return ActionKind::Invalid;
    throw Error("bad-json", "unknown action kind '" + s + "'");
}

struct Action {
    ActionKind kind = ActionKind::Invalid;
    std::optional<std::string> url;
    std::optional<json> payload;  // Post only
    std::optional<json> answer;   // Finish only, a JSON array
    std::string raw_text;

    bool operator==(const Action&) const = default;
};

struct Step {
    int round = 0;
    std::string state_before;
    Action action;
    std::string observation;
    long prompt_tokens = 0;
    long completion_tokens = 0;

    bool operator==(const Step&) const = default;
};

enum class TrajectoryStatus { Finished, Timeout, InvalidAction };

inline std::string to_string(TrajectoryStatus s) {
    switch (s) {
        case TrajectoryStatus::Finished: return "finished";
        case TrajectoryStatus::Timeout: return "timeout";
        case TrajectoryStatus::InvalidAction: return "invalid_action";
    }
    return "invalid_action";
}

inline TrajectoryStatus trajectory_status_from_string(const std::string& s) {
    if (s == "finished") return TrajectoryStatus::Finished;
    if (s == "timeout") return TrajectoryStatus::Timeout;
    if (s == "invalid_action") return TrajectoryStatus::InvalidAction;
    throw Error("bad-json", "unknown trajectory status '" + s + "'");
}

struct Trajectory {
    std::string task_id;
    int run_index = 1;
    std::vector<Step> steps;
    TrajectoryStatus status = TrajectoryStatus::Timeout;
    std::optional<json> final_answer;

    bool operator==(const Trajectory&) const = default;
};

// ---------------------------------------------------------------------------
// Logical skills and step evaluations

enum class SkillCategory {
    ParameterMapping,
    DataExtraction,
    AgeCalculation,
    ApiProtocol,
    TemporalReasoning,
    SafetyCheck,
    Other,
};

inline std::string to_string(SkillCategory c) {
    switch (c) {
        case SkillCategory::ParameterMapping: return "parameter_mapping";
        case SkillCategory::DataExtraction: return "data_extraction";
        case SkillCategory::AgeCalculation: return "age_calculation";
        case SkillCategory::ApiProtocol: return "api_protocol";
        case SkillCategory::TemporalReasoning: return "temporal_reasoning";
        case SkillCategory::SafetyCheck: return "safety_check";
        case SkillCategory::Other: return "other";
    }
    return "other";
}

// Unknown category strings map to Other; the category list is open-ended.
inline SkillCategory skill_category_from_string(const std::string& s) {
    if (s == "parameter_mapping") return SkillCategory::ParameterMapping;
    if (s == "data_extraction") return SkillCategory::DataExtraction;
    if (s == "age_calculation") return SkillCategory::AgeCalculation;
    if (s == "api_protocol") return SkillCategory::ApiProtocol;
    if (s == "temporal_reasoning") return SkillCategory::TemporalReasoning;
    if (s == "safety_check") return SkillCategory::SafetyCheck;
    return SkillCategory::Other;
}

enum class SkillPolarity { SuccessParadigm, CorrectionAxiom };

inline std::string to_string(SkillPolarity p) {
    return p == SkillPolarity::SuccessParadigm ? "success_paradigm" : "correction_axiom";
}

inline SkillPolarity skill_polarity_from_string(const std::string& s) {
    if (s == "success_paradigm") return SkillPolarity::SuccessParadigm;
    if (s == "correction_axiom") return SkillPolarity::CorrectionAxiom;
    throw Error("bad-json", "unknown skill polarity '" + s + "'");
}

struct LogicalSkill {
    std::string scenario;
    std::string generalized_logic;
    std::string canonical_example;
    std::string error_avoidance;
    SkillCategory category = SkillCategory::Other;
    SkillPolarity polarity = SkillPolarity::SuccessParadigm;

    bool operator==(const LogicalSkill&) const = default;
};

enum class StepLabel { Positive, Negative };

inline std::string to_string(StepLabel l) {
    return l == StepLabel::Positive ? "positive" : "negative";
}

inline StepLabel step_label_from_string(const std::string& s) {
    if (s == "positive") return StepLabel::Positive;
    if (s == "negative") return StepLabel::Negative;
    throw Error("bad-json", "unknown step label '" + s + "'");
}

struct StepEvaluation {
    int round = 0;
    std::string state;  // cumulative state including this round
    Action action;
    StepLabel label = StepLabel::Positive;
    LogicalSkill skill;

    bool operator==(const StepEvaluation&) const = default;
};

// A step evaluation together with the provenance needed for record grouping.
struct TaggedEvaluation {
    std::string task_id;
    std::string query;
    int run_index = 1;
    StepEvaluation eval;

    bool operator==(const TaggedEvaluation&) const = default;
};

// ---------------------------------------------------------------------------
// Memory records

struct RecordTransition {
    int run_index = 1;
    StepEvaluation eval;

    bool operator==(const RecordTransition&) const = default;
};

struct MemoryRecord {
    std::string record_id;
    std::string query;
    std::vector<RecordTransition> transitions;  // ordered by (run_index, round)

    bool operator==(const MemoryRecord&) const = default;
};

// Stable cross-run identity for a record: lowercase hex of a 64-bit hash
// of the exact query string.
inline std::string record_id_for(const std::string& query) {
    return to_hex64(fnv1a64(query));
}

// ---------------------------------------------------------------------------
// Task outcomes

struct TaskOutcome {
    std::string task_id;
    TaskCategory category = TaskCategory::Query;
    bool completed = false;
    bool success = false;
    bool invalid = false;
    bool timeout = false;
    int turns = 0;
    long tokens = 0;
    bool one_shot = false;

    bool operator==(const TaskOutcome&) const = default;
};

// Exactly one of {success, completed-but-wrong, invalid, timeout} must hold.
inline bool outcome_partition_holds(const TaskOutcome& o) {
    const int n = (o.success ? 1 : 0) + ((o.completed && !o.success) ? 1 : 0) +
                  (o.invalid ? 1 : 0) + (o.timeout ? 1 : 0);
    if (n != 1) return false;
    if (o.success && !o.completed) return false;
    if (o.invalid && o.completed) return false;
    if (o.timeout && o.completed) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Gold answer comparison: trim, case-fold, numeric values with absolute
// tolerance 1e-6. Arrays compare element-wise; a scalar expectation matches
// a one-element array of the same value.

inline std::string normalize_answer_text(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline bool json_values_match(const json& a, const json& b) {
    if (a.is_number() && b.is_number())
        return std::fabs(a.get<double>() - b.get<double>()) <= 1e-6;
    if (a.is_string() && b.is_string())
        return normalize_answer_text(a.get<std::string>()) ==
               normalize_answer_text(b.get<std::string>());
    if (a.is_string() && b.is_number())
        return json_values_match(b, a);
    if (a.is_number() && b.is_string()) {
        // Numeric gold against a stringified number ("42" vs 42).
        try {
            size_t pos = 0;
            const std::string t = normalize_answer_text(b.get<std::string>());
            const double v = std::stod(t, &pos);
            if (pos != t.size()) return false;
            return std::fabs(a.get<double>() - v) <= 1e-6;
        } catch (...) {
            return false;
        }
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!json_values_match(a[i], b[i])) return false;
        return true;
    }
    if (a.is_object() && b.is_object()) {
        if (a.size() != b.size()) return false;
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key())) return false;
            if (!json_values_match(it.value(), b[it.key()])) return false;
        }
        return true;
    }
    return a == b;
}

inline bool answer_matches(const json& expected, const json& actual) {
    if (json_values_match(expected, actual)) return true;
    // FINISH answers are arrays; unwrap singletons against scalar golds.
    if (!expected.is_array() && actual.is_array() && actual.size() == 1)
        return json_values_match(expected, actual[0]);
    if (expected.is_array() && expected.size() == 1 && !actual.is_array())
        return json_values_match(expected[0], actual);
    return false;
}

// ---------------------------------------------------------------------------
// Canonical JSON forms

inline void to_json(json& j, const ExpectedWrite& w) {
    j = json{{"path", w.path}, {"fields", w.fields}};
}

inline void from_json(const json& j, ExpectedWrite& w) {
    w.path = j.at("path").get<std::string>();
    w.fields = j.value("fields", json::object());
}

inline void to_json(json& j, const GoldReference& g) {
    j = json::object();
    if (g.expected_answer.has_value()) j["expected_answer"] = *g.expected_answer;
    if (!g.expected_writes.empty()) j["expected_writes"] = g.expected_writes;
}

inline void from_json(const json& j, GoldReference& g) {
    g = GoldReference{};
    if (j.contains("expected_answer")) g.expected_answer = j.at("expected_answer");
    if (j.contains("expected_writes"))
        g.expected_writes = j.at("expected_writes").get<std::vector<ExpectedWrite>>();
}

inline void to_json(json& j, const ClinicalTask& t) {
    j = json{{"task_id", t.task_id}, {"query", t.query},     {"context", t.context},
             {"category", to_string(t.category)}, {"gold", t.gold}, {"min_turns", t.min_turns}};
}

inline void from_json(const json& j, ClinicalTask& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.query = j.at("query").get<std::string>();
    t.context = j.value("context", std::string{});
    t.category = task_category_from_string(j.at("category").get<std::string>());
    t.gold = j.at("gold").get<GoldReference>();
    t.min_turns = j.value("min_turns", 1);
}

inline void to_json(json& j, const Action& a) {
    j = json{{"kind", to_string(a.kind)}, {"raw_text", a.raw_text}};
    if (a.url.has_value()) j["url"] = *a.url;
    if (a.payload.has_value()) j["payload"] = *a.payload;
    if (a.answer.has_value()) j["answer"] = *a.answer;
}

inline void from_json(const json& j, Action& a) {
    a = Action{};
    a.kind = action_kind_from_string(j.at("kind").get<std::string>());
    a.raw_text = j.at("raw_text").get<std::string>();
    if (j.contains("url")) a.url = j.at("url").get<std::string>();
    if (j.contains("payload")) a.payload = j.at("payload");
    if (j.contains("answer")) a.answer = j.at("answer");
}

inline void to_json(json& j, const Step& s) {
    j = json{{"round", s.round},
             {"state_before", s.state_before},
             {"action", s.action},
             {"observation", s.observation},
             {"prompt_tokens", s.prompt_tokens},
             {"completion_tokens", s.completion_tokens}};
}

inline void from_json(const json& j, Step& s) {
    s.round = j.at("round").get<int>();
    s.state_before = j.at("state_before").get<std::string>();
    s.action = j.at("action").get<Action>();
    s.observation = j.at("observation").get<std::string>();
    s.prompt_tokens = j.value("prompt_tokens", 0L);
    s.completion_tokens = j.value("completion_tokens", 0L);
}

inline void to_json(json& j, const Trajectory& t) {
    j = json{{"task_id", t.task_id},
             {"run_index", t.run_index},
             {"status", to_string(t.status)},
             {"steps", t.steps}};
    if (t.final_answer.has_value()) j["final_answer"] = *t.final_answer;
}

inline void from_json(const json& j, Trajectory& t) {
    t = Trajectory{};
    t.task_id = j.at("task_id").get<std::string>();
    t.run_index = j.at("run_index").get<int>();
    t.status = trajectory_status_from_string(j.at("status").get<std::string>());
    t.steps = j.at("steps").get<std::vector<Step>>();
    if (j.contains("final_answer")) t.final_answer = j.at("final_answer");
}

inline void to_json(json& j, const LogicalSkill& s) {
    j = json{{"scenario", s.scenario},
             {"generalized_logic", s.generalized_logic},
             {"canonical_example", s.canonical_example},
             {"error_avoidance", s.error_avoidance},
             {"category", to_string(s.category)},
             {"polarity", to_string(s.polarity)}};
}

inline void from_json(const json& j, LogicalSkill& s) {
    s.scenario = j.at("scenario").get<std::string>();
    s.generalized_logic = j.at("generalized_logic").get<std::string>();
    s.canonical_example = j.at("canonical_example").get<std::string>();
    s.error_avoidance = j.at("error_avoidance").get<std::string>();
    s.category = skill_category_from_string(j.at("category").get<std::string>());
    s.polarity = skill_polarity_from_string(j.at("polarity").get<std::string>());
}

inline void to_json(json& j, const StepEvaluation& e) {
    j = json{{"round", e.round},
             {"state", e.state},
             {"action", e.action},
             {"label", to_string(e.label)},
             {"skill", e.skill}};
}

inline void from_json(const json& j, StepEvaluation& e) {
    e.round = j.at("round").get<int>();
    e.state = j.at("state").get<std::string>();
    e.action = j.at("action").get<Action>();
    e.label = step_label_from_string(j.at("label").get<std::string>());
    e.skill = j.at("skill").get<LogicalSkill>();
}

inline void to_json(json& j, const TaggedEvaluation& t) {
    j = json{{"task_id", t.task_id},
             {"query", t.query},
             {"run_index", t.run_index},
             {"eval", t.eval}};
}

inline void from_json(const json& j, TaggedEvaluation& t) {
    t.task_id = j.at("task_id").get<std::string>();
    t.query = j.at("query").get<std::string>();
    t.run_index = j.at("run_index").get<int>();
    t.eval = j.at("eval").get<StepEvaluation>();
}

inline void to_json(json& j, const RecordTransition& t) {
    j = json{{"run_index", t.run_index}, {"eval", t.eval}};
}

inline void from_json(const json& j, RecordTransition& t) {
    t.run_index = j.at("run_index").get<int>();
    t.eval = j.at("eval").get<StepEvaluation>();
}

inline void to_json(json& j, const MemoryRecord& r) {
    j = json{{"record_id", r.record_id}, {"query", r.query}, {"transitions", r.transitions}};
}

inline void from_json(const json& j, MemoryRecord& r) {
    r.record_id = j.at("record_id").get<std::string>();
    r.query = j.at("query").get<std::string>();
    r.transitions = j.at("transitions").get<std::vector<RecordTransition>>();
}

inline void to_json(json& j, const TaskOutcome& o) {
    j = json{{"task_id", o.task_id},   {"category", to_string(o.category)},
             {"completed", o.completed}, {"success", o.success},
             {"invalid", o.invalid},   {"timeout", o.timeout},
             {"turns", o.turns},       {"tokens", o.tokens},
             {"one_shot", o.one_shot}};
}

inline void from_json(const json& j, TaskOutcome& o) {
    o.task_id = j.at("task_id").get<std::string>();
    o.category = task_category_from_string(j.at("category").get<std::string>());
    o.completed = j.at("completed").get<bool>();
    o.success = j.at("success").get<bool>();
    o.invalid = j.at("invalid").get<bool>();
    o.timeout = j.at("timeout").get<bool>();
    o.turns = j.at("turns").get<int>();
    o.tokens = j.at("tokens").get<long>();
    o.one_shot = j.at("one_shot").get<bool>();
}

// Task suite files hold one JSON array of tasks.
inline std::vector<ClinicalTask> load_task_suite(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.is_array()) throw Error("bad-json", path + ": task suite must be a JSON array");
    auto tasks = j.get<std::vector<ClinicalTask>>();
    const auto violations = validate_task_suite(tasks);
    if (!violations.empty()) {
        std::string msg = path + ": invalid task suite:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw Error("invalid-task", msg);
    }
    return tasks;
}

}  // namespace selsm
