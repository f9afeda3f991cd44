#pragma once
// The agent-environment loop: builds cumulative states, asks the policy for
// one action per turn, executes it through the gateway and collects the
// resulting trajectory. When an injector is present, skills are fetched
// fresh before every decision point.

#include <string>
#include <vector>

#include "selsm/action.hpp"
#include "selsm/concurrency.hpp"
#include "selsm/gateway.hpp"
#include "selsm/model.hpp"
#include "selsm/providers.hpp"
#include "selsm/render.hpp"
#include "selsm/state.hpp"

namespace selsm {

// Original prompt for this harness; it pins the action grammar the parser
// accepts.
inline constexpr const char* kAgentSystemPrompt =
    "You are a clinical operations agent completing tasks against a FHIR REST API.\n"
    "The task and the interaction history so far are given below. Reply with exactly one\n"
    "action per turn, in one of these forms and nothing else:\n"
    "  GET <relative-path-with-query-parameters>\n"
    "  POST <relative-path>\n"
    "  <JSON payload on the following lines>\n"
    "  FINISH(<JSON array containing the final answer>)\n"
    "Search responses are FHIR Bundle JSON. Issue FINISH as soon as the task is done.\n"
    "When a block of retrieved logical skills is present, treat it as prior operational\n"
    "knowledge distilled from earlier workflows.";

struct EpisodeOptions {
    int max_turns = 8;
    double temperature = 0.7;
    std::string model;
    SkillSections sections = SkillSections::All;
};

inline Trajectory run_episode(const ClinicalTask& task, ChatProvider& policy, Gateway& gateway,
                              const EpisodeOptions& options, int run_index = 1,
                              SkillInjector* injector = nullptr) {
    if (options.max_turns < 1) throw Error("invalid-config", "max_turns must be >= 1");

    Trajectory trajectory;
    trajectory.task_id = task.task_id;
    trajectory.run_index = run_index;
    trajectory.status = TrajectoryStatus::Timeout;

    StateText state = init_state(task.query, task.context);
    for (int t = 1; t <= options.max_turns; ++t) {
        std::vector<LogicalSkill> skills;
        if (injector != nullptr) skills = injector->skills_for(state, t);

        ChatRequest request;
        request.model = options.model;
        request.temperature = options.temperature;
        request.messages = {{"system", kAgentSystemPrompt},
                            {"user", inject(skills, state, options.sections)}};
        const ChatResponse response = policy.chat(request);

        Step step;
        step.round = t;
        step.state_before = state.text();
        step.action = parse_action(response.text);
        step.prompt_tokens = response.prompt_tokens;
        step.completion_tokens = response.completion_tokens;

        if (step.action.kind == ActionKind::Finish) {
            trajectory.final_answer = step.action.answer;
            trajectory.status = TrajectoryStatus::Finished;
            trajectory.steps.push_back(std::move(step));
            break;
        }
        if (step.action.kind == ActionKind::Invalid) {
            trajectory.status = TrajectoryStatus::InvalidAction;
            trajectory.steps.push_back(std::move(step));
            break;
        }
        try {
            step.observation = gateway.execute(step.action);
        } catch (const Error& e) {
            step.observation = e.what();
            trajectory.status = TrajectoryStatus::InvalidAction;
            trajectory.steps.push_back(std::move(step));
            break;
        }
        state = append_round(state, t, step.action.raw_text, step.observation);
        trajectory.steps.push_back(std::move(step));
    }
    return trajectory;
}

// K trajectories per task, run_index 1..K. Per-episode failures become
// InvalidAction trajectories; the batch never aborts. With jobs > 1 tasks
// run concurrently (runs of one task stay sequential).
inline std::vector<Trajectory> collect_trajectories(const std::vector<ClinicalTask>& tasks,
                                                    ChatProvider& policy, Gateway& gateway,
                                                    int k, const EpisodeOptions& options,
                                                    int jobs = 1,
                                                    SkillInjector* injector = nullptr) {
    if (k < 1) throw Error("invalid-config", "K must be >= 1");
    std::vector<Trajectory> out(tasks.size() * static_cast<size_t>(k));
    parallel_for(tasks.size(), jobs, [&](size_t i) {
        for (int run = 1; run <= k; ++run) {
            Trajectory result;
            try {
                result = run_episode(tasks[i], policy, gateway, options, run, injector);
            } catch (const std::exception& e) {
                result = Trajectory{};
                result.task_id = tasks[i].task_id;
                result.run_index = run;
                result.status = TrajectoryStatus::InvalidAction;
                Step step;
                step.round = 1;
                step.state_before = init_state(tasks[i].query, tasks[i].context).text();
                step.action.kind = ActionKind::Invalid;
                step.observation = e.what();
                result.steps.push_back(std::move(step));
            }
            out[i * static_cast<size_t>(k) + static_cast<size_t>(run - 1)] = std::move(result);
        }
    });
    return out;
}

}  // namespace selsm
