#pragma once

#include <charconv>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "edaschema/errors.hpp"

namespace eda::text {

inline std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

// Shortest decimal form that parses back to the same double.
inline std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

inline double to_double(std::string_view tok, int line = 0) {
    // std::from_chars(double) is used for exactness; strtod as fallback
    // is not needed on this toolchain.
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
    return v;
}

inline long long to_int(std::string_view tok, int line = 0) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
    return v;
}

// Iterates lines of `s`, tracking 1-based line numbers.
class LineReader {
  public:
    explicit LineReader(std::string_view s) : s_(s) {}

    bool next(std::string_view& line) {
        if (pos_ >= s_.size()) return false;
        size_t e = s_.find('\n', pos_);
        if (e == std::string_view::npos) e = s_.size();
        line = s_.substr(pos_, e - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos_ = e + 1;
        ++line_no_;
        return true;
    }

    int line_no() const { return line_no_; }

  private:
    std::string_view s_;
    size_t pos_ = 0;
    int line_no_ = 0;
};

// Whitespace token stream over a whole document with line tracking.
// Statement-oriented formats (LEF/DEF/SPEF) read through this.
class TokenStream {
  public:
    explicit TokenStream(std::string_view s) : s_(s) {}

    bool next(std::string& tok) {
        skip_ws_and_comments();
        if (pos_ >= s_.size()) return false;
        size_t b = pos_;
        while (pos_ < s_.size() && !is_ws(s_[pos_])) ++pos_;
        tok.assign(s_.substr(b, pos_ - b));
        return true;
    }

    std::string expect(std::string_view what) {
        std::string tok;
        if (!next(tok))
            throw ParseError("unexpected end of input, expected " + std::string(what),
                             line_);
        return tok;
    }

    void expect_literal(std::string_view lit) {
        std::string tok = expect(lit);
        if (tok != lit)
            throw ParseError("expected '" + std::string(lit) + "', got '" + tok + "'",
                             line_);
    }

    int line() const { return line_; }
    bool eof() {
        skip_ws_and_comments();
        return pos_ >= s_.size();
    }

  private:
    static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

    void skip_ws_and_comments() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (is_ws(c)) {
                ++pos_;
            } else if (c == '#') {  // comment to end of line
                while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view s_;
    size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace eda::text
