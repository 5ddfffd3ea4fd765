#include <array>
#include <cctype>

#include "trollkit/linguistics.hpp"

namespace trollkit {

namespace {

bool is_word_byte(char ch)
{
    auto u = static_cast<unsigned char>(ch);
    return u >= 0x80 || std::isalnum(u);
}

bool is_digit(char ch)
{
    return std::isdigit(static_cast<unsigned char>(ch)) != 0;
}

bool is_terminal(char ch)
{
    return ch == '.' || ch == '!' || ch == '?';
}

constexpr std::array<std::string_view, 18> kFixedEmoticons{
    "<3", "</3", "^_^", "^^", "-_-", "xD", "XD", "xd", "o_O", "O_o", "o.O", "D:", ">:(", ">:)", "T_T", ";_;",
    ":'(", ":')"};

constexpr std::array<std::string_view, 4> kClitics{"'s", "'m", "'re", "'ve"};
constexpr std::array<std::string_view, 2> kMoreClitics{"'ll", "'d"};

bool is_clitic(std::string_view lower)
{
    for (auto c : kClitics)
        if (lower == c)
            return true;
    for (auto c : kMoreClitics)
        if (lower == c)
            return true;
    return false;
}

void push(std::vector<Token>& out, std::string_view text, std::size_t begin, std::size_t len)
{
    Token t;
    t.surface = std::string(text.substr(begin, len));
    t.lower = to_lower(t.surface);
    t.begin = begin;
    t.end = begin + len;
    out.push_back(std::move(t));
}

// Emits a word, splitting a trailing n't or 's/'m/'re/'ve/'ll/'d clitic.
void push_word(std::vector<Token>& out, std::string_view text, std::size_t begin, std::size_t len)
{
    std::string lower = to_lower(text.substr(begin, len));
    if (lower.size() > 3 && lower.compare(lower.size() - 3, 3, "n't") == 0) {
        push(out, text, begin, len - 3);
        push(out, text, begin + len - 3, 3);
        return;
    }
    auto apos = lower.rfind('\'');
    if (apos != std::string::npos && apos > 0 && is_clitic(std::string_view(lower).substr(apos))) {
        push(out, text, begin, apos);
        push(out, text, begin + apos, len - apos);
        return;
    }
    push(out, text, begin, len);
}

void split_chunk(std::string_view text, std::size_t offset, std::size_t len, std::vector<Token>& out)
{
    std::string_view chunk = text.substr(offset, len);
    if (is_emoticon(chunk)) {
        push(out, text, offset, len);
        return;
    }
    std::size_t p = 0;
    while (p < len) {
        char ch = chunk[p];
        if (is_word_byte(ch)) {
            std::size_t q = p + 1;
            while (q < len) {
                char c = chunk[q];
                if (is_word_byte(c)) {
                    ++q;
                    continue;
                }
                bool joiner = c == '\'' || c == '-';
                bool numeric = (c == '.' || c == ',') && is_digit(chunk[q - 1]);
                if ((joiner || numeric) && q + 1 < len && is_word_byte(chunk[q + 1]) &&
                    (!numeric || is_digit(chunk[q + 1]))) {
                    q += 2;
                    continue;
                }
                break;
            }
            push_word(out, text, offset + p, q - p);
            p = q;
            continue;
        }

        // Emoticon closing the chunk ("great:)") or opening it (":)!").
        if (p > 0 && is_emoticon(chunk.substr(p))) {
            push(out, text, offset + p, len - p);
            return;
        }
        if (p == 0) {
            bool matched = false;
            for (std::size_t l = std::min<std::size_t>(4, len); l >= 2; --l) {
                if (is_emoticon(chunk.substr(0, l))) {
                    push(out, text, offset, l);
                    p = l;
                    matched = true;
                    break;
                }
            }
            if (matched)
                continue;
        }

        if (ch == '\'') {
            std::size_t q = p + 1;
            while (q < len && std::isalpha(static_cast<unsigned char>(chunk[q])))
                ++q;
            if (q > p + 1 && is_clitic(to_lower(chunk.substr(p, q - p)))) {
                push(out, text, offset + p, q - p);
                p = q;
                continue;
            }
        }
        if (is_terminal(ch)) {
            std::size_t q = p + 1;
            while (q < len && is_terminal(chunk[q]))
                ++q;
            push(out, text, offset + p, q - p);
            p = q;
            continue;
        }
        push(out, text, offset + p, 1);
        ++p;
    }
}

} // namespace

std::string to_lower(std::string_view s)
{
    std::string out(s);
    for (char& ch : out)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

bool is_emoticon(std::string_view t)
{
    if (t.size() < 2 || t.size() > 4)
        return false;
    for (auto e : kFixedEmoticons)
        if (t == e)
            return true;
    // eyes [nose] mouth, e.g. :) ;-) =D :'( :P
    std::size_t i = 0;
    if (t[i] == '>' && t.size() > 2)
        ++i;
    if (t[i] != ':' && t[i] != ';' && t[i] != '=')
        return false;
    ++i;
    if (i < t.size() - 1 && (t[i] == '-' || t[i] == '\'' || t[i] == '^' || t[i] == 'o'))
        ++i;
    if (i != t.size() - 1)
        return false;
    constexpr std::string_view mouths = ")(][DPpOo/\\|*3$@S";
    return mouths.find(t[i]) != std::string_view::npos;
}

std::vector<Token> tokenize(std::string_view text)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        if (i > start)
            split_chunk(text, start, i - start, out);
    }
    return out;
}

std::vector<SentenceSpan> split_sentences(std::span<const Token> tokens)
{
    std::vector<SentenceSpan> out;
    std::size_t first = 0;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        const auto& s = tokens[k].surface;
        bool terminal = !s.empty() && !is_emoticon(s);
        for (char ch : s)
            terminal = terminal && is_terminal(ch);
        if (terminal) {
            out.push_back({first, k + 1});
            first = k + 1;
        }
    }
    if (first < tokens.size())
        out.push_back({first, tokens.size()});
    return out;
}

std::string detokenize(const AnalyzedText& a)
{
    std::string out;
    for (const auto& t : a.tokens) {
        if (!out.empty())
            out += ' ';
        out += t.surface;
    }
    return out;
}

} // namespace trollkit
