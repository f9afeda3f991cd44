#pragma once
// Total grammar over raw agent output. The first non-blank line decides:
//   GET <path>                          -> Get
//   POST <path>  + JSON body below      -> Post
//   FINISH(<json array>)                -> Finish (argument may span lines)
// Anything else, including malformed bodies, becomes kind=Invalid with the
// raw text preserved. Parsing never throws.

#include <string>
#include <string_view>

#include "selsm/model.hpp"

namespace selsm {

namespace detail {

inline std::string_view trim_view(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

inline Action parse_action(const std::string& raw) {
    Action invalid;
    invalid.kind = ActionKind::Invalid;
    invalid.raw_text = raw;

    // Locate the first non-blank line.
    size_t line_start = 0;
    std::string_view text(raw);
    std::string_view first_line;
    while (line_start <= text.size()) {
        const size_t nl = text.find('\n', line_start);
        const std::string_view line =
            text.substr(line_start, nl == std::string_view::npos ? std::string_view::npos
                                                                 : nl - line_start);
        if (!detail::trim_view(line).empty()) {
            first_line = detail::trim_view(line);
            line_start = (nl == std::string_view::npos) ? text.size() : nl + 1;
            break;
        }
        if (nl == std::string_view::npos) return invalid;
        line_start = nl + 1;
    }
    if (first_line.empty()) return invalid;

    if (first_line.rfind("GET ", 0) == 0) {
        const std::string_view path = detail::trim_view(first_line.substr(4));
        if (path.empty()) return invalid;
        Action a;
        a.kind = ActionKind::Get;
        a.url = std::string(path);
        a.raw_text = raw;
        return a;
    }

    if (first_line.rfind("POST ", 0) == 0) {
        const std::string_view path = detail::trim_view(first_line.substr(5));
        if (path.empty()) return invalid;
        const std::string_view body = detail::trim_view(text.substr(line_start));
        if (body.empty()) return invalid;
        json payload = json::parse(body, nullptr, /*allow_exceptions=*/false);
        if (payload.is_discarded()) return invalid;
        Action a;
        a.kind = ActionKind::Post;
        a.url = std::string(path);
        a.payload = std::move(payload);
        a.raw_text = raw;
        return a;
    }

    if (first_line.rfind("FINISH(", 0) == 0) {
        // The argument runs to the final ')' of the trimmed output, so a
        // pretty-printed array spanning lines still parses.
        const std::string_view all = detail::trim_view(text);
        if (all.rfind("FINISH(", 0) != 0 || all.back() != ')') return invalid;
        const std::string_view inner = all.substr(7, all.size() - 8);
        json answer = json::parse(inner, nullptr, /*allow_exceptions=*/false);
        if (answer.is_discarded() || !answer.is_array()) return invalid;
        Action a;
        a.kind = ActionKind::Finish;
        a.answer = std::move(answer);
        a.raw_text = raw;
        return a;
    }

    return invalid;
}

}  // namespace selsm
