#pragma once
// Rendering of logical skills into prompt text and the injection template
// that places retrieved skills ahead of the current state block.

#include <string>
#include <vector>

#include "selsm/model.hpp"
#include "selsm/state.hpp"

namespace selsm {

// Section subsets used by the ablation switches: LogicOnly drops the worked
// example and error-avoidance trace, ReasonOnly drops the generalized logic.
enum class SkillSections { All, LogicOnly, ReasonOnly };

inline SkillSections skill_sections_from_string(const std::string& s) {
    if (s == "all") return SkillSections::All;
    if (s == "logic") return SkillSections::LogicOnly;
    if (s == "reason") return SkillSections::ReasonOnly;
    throw Error("invalid-config", "unknown skill-sections value '" + s + "'");
}

inline std::string polarity_heading(SkillPolarity p) {
    return p == SkillPolarity::SuccessParadigm ? "Success Paradigm" : "Correction Axiom";
}

inline std::string category_heading(SkillCategory c) {
    switch (c) {
        case SkillCategory::ParameterMapping: return "Parameter Mapping";
        case SkillCategory::DataExtraction: return "Data Extraction";
        case SkillCategory::AgeCalculation: return "Age Calculation";
        case SkillCategory::ApiProtocol: return "API Protocol";
        case SkillCategory::TemporalReasoning: return "Temporal Reasoning";
        case SkillCategory::SafetyCheck: return "Safety Check";
        case SkillCategory::Other: return "Other";
    }
    return "Other";
}

// Plain four-section body; also the text that gets embedded for a skill.
inline std::string render_skill_body(const LogicalSkill& skill,
                                     SkillSections sections = SkillSections::All) {
    std::string out = "Task Scenario: " + skill.scenario + "\n";
    if (sections != SkillSections::ReasonOnly)
        out += "Generalized Logic: " + skill.generalized_logic + "\n";
    if (sections != SkillSections::LogicOnly) {
        out += "Canonical Example: " + skill.canonical_example + "\n";
        out += "Error Avoidance: " + skill.error_avoidance + "\n";
    }
    return out;
}

inline std::string render_skill(const LogicalSkill& skill,
                                SkillSections sections = SkillSections::All) {
    return "(" + polarity_heading(skill.polarity) + " / " + category_heading(skill.category) +
           ")\n" + render_skill_body(skill, sections);
}

// Builds the user prompt: a delimited skills block (deduplicated by rendered
// text) immediately before the current state. With no skills the result is
// byte-equal to the uninjected prompt.
inline std::string inject(const std::vector<LogicalSkill>& skills, const StateText& state,
                          SkillSections sections = SkillSections::All) {
    if (skills.empty()) return state.text();
    std::vector<std::string> rendered;
    for (const auto& skill : skills) {
        std::string r = render_skill(skill, sections);
        bool dup = false;
        for (const auto& seen : rendered)
            if (seen == r) { dup = true; break; }
        if (!dup) rendered.push_back(std::move(r));
    }
    std::string out = "===RETRIEVED LOGICAL SKILLS===\n";
    for (size_t i = 0; i < rendered.size(); ++i)
        out += "[Skill " + std::to_string(i + 1) + "] " + rendered[i];
    out += "===END SKILLS===\n";
    out += state.text();
    return out;
}

// Retrieval hook the episode loop calls before every decision point.
class SkillInjector {
public:
    virtual ~SkillInjector() = default;
    virtual std::vector<LogicalSkill> skills_for(const StateText& state, int round) = 0;
};

}  // namespace selsm
