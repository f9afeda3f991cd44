#pragma once
// Cumulative interaction state: a delimited task header followed by
// serialized round blocks. Each append only ever concatenates, so any
// earlier state is an exact string prefix of every later one.

#include <string>
#include <utility>

#include "selsm/io.hpp"

namespace selsm {

namespace detail {

// Query and context are stored JSON-string-encoded on single header lines,
// so content containing newlines or the block delimiter round-trips exactly.
inline std::string encode_header_field(const std::string& s) {
    return json(s).dump();
}

inline std::string decode_header_field(const std::string& line, const char* what) {
    try {
        const json j = json::parse(line);
        if (!j.is_string()) throw Error("bad-state", std::string("malformed ") + what);
        return j.get<std::string>();
    } catch (const json::parse_error&) {
        throw Error("bad-state", std::string("malformed ") + what + " in task header");
    }
}

}  // namespace detail

class StateText {
public:
    StateText() = default;

    const std::string& text() const { return text_; }
    int round_count() const { return rounds_; }

    // Trusted reconstruction from logged text plus a known round count.
    static StateText from_parts(std::string text, int rounds) {
        StateText s;
        s.text_ = std::move(text);
        s.rounds_ = rounds;
        return s;
    }

private:
    friend StateText init_state(const std::string&, const std::string&);
    friend StateText append_round(const StateText&, int, const std::string&, const std::string&);

    std::string text_;
    int rounds_ = 0;
};

inline StateText init_state(const std::string& query, const std::string& context) {
    if (query.empty()) throw Error("bad-state", "query must be non-empty");
    StateText s;
    s.text_ = "===TASK===\n";
    s.text_ += "QUERY: " + detail::encode_header_field(query) + "\n";
    s.text_ += "CONTEXT: " + detail::encode_header_field(context) + "\n";
    s.text_ += "===END TASK===\n";
    s.rounds_ = 0;
    return s;
}

// Fixed round block template; the observation is appended verbatim.
inline std::string format_round_block(int t, const std::string& action_text,
                                      const std::string& observation) {
    return "[Round " + std::to_string(t) + "]\nACTION: " + action_text +
           "\nRESPONSE: " + observation + "\n";
}

inline StateText append_round(const StateText& state, int t, const std::string& action_text,
                              const std::string& observation) {
    if (t != state.round_count() + 1)
        throw Error("bad-state", "non-consecutive round " + std::to_string(t) +
                                     " (expected " + std::to_string(state.round_count() + 1) + ")");
    StateText next;
    next.text_ = state.text() + format_round_block(t, action_text, observation);
    next.rounds_ = t;
    return next;
}

namespace detail {

inline std::pair<std::string, std::string> parse_header(const std::string& text) {
    auto next_line = [&text](size_t& pos) -> std::string {
        const size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) throw Error("bad-state", "no task header");
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    size_t pos = 0;
    if (next_line(pos) != "===TASK===") throw Error("bad-state", "no task header");
    const std::string qline = next_line(pos);
    const std::string cline = next_line(pos);
    if (next_line(pos) != "===END TASK===") throw Error("bad-state", "no task header");
    if (qline.rfind("QUERY: ", 0) != 0 || cline.rfind("CONTEXT: ", 0) != 0)
        throw Error("bad-state", "no task header");
    return {decode_header_field(qline.substr(7), "query"),
            decode_header_field(cline.substr(9), "context")};
}

}  // namespace detail

// Returns exactly the query stored by init_state, however many rounds
// have been appended since.
inline std::string extract_query(const StateText& state) {
    return detail::parse_header(state.text()).first;
}

inline std::string extract_query(const std::string& state_text) {
    return detail::parse_header(state_text).first;
}

inline std::string extract_context(const StateText& state) {
    return detail::parse_header(state.text()).second;
}

}  // namespace selsm
