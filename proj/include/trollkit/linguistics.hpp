#pragma once

// Text preprocessing substrate: tokenization, sentence splitting, lemmas,
// POS tags, valence sentiment, word lists and embedding lookup.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace trollkit {

struct Token {
    std::string surface;
    std::string lower;
    std::string lemma;
    std::string pos;
    std::size_t begin = 0; // byte offsets into AnalyzedText::raw
    std::size_t end = 0;
};

struct SentenceSpan {
    std::size_t first = 0; // token index range [first, last)
    std::size_t last = 0;
};

struct FrameArgument {
    std::string name;
    std::string text;
};

struct Frame {
    std::string name;
    std::string target;
    std::vector<FrameArgument> arguments;
};

struct AnalyzedText {
    std::string raw;
    std::vector<SentenceSpan> sentences;
    std::vector<Token> tokens;
    std::vector<Frame> frames; // only from sidecar annotations
};

// Externally produced annotation layers for one comment. Empty layers fall
// back to the built-in pipeline.
struct SidecarRecord {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<std::string> lemmas;
    std::vector<std::string> pos;
    std::vector<SentenceSpan> sentences;
    std::vector<Frame> frames;
};

class SidecarIndex {
public:
    static SidecarIndex read(std::istream& in);
    static SidecarIndex read_file(const std::filesystem::path& path);

    const SidecarRecord* find(std::string_view comment_id) const;
    void add(SidecarRecord record);
    std::size_t size() const { return records_.size(); }

private:
    std::unordered_map<std::string, SidecarRecord> records_;
};

// Whitespace chunks split into words (with internal apostrophes/hyphens),
// numbers, emoticons, punctuation; clitics such as n't and 's become their own tokens.
std::vector<Token> tokenize(std::string_view text);
bool is_emoticon(std::string_view token);
std::string to_lower(std::string_view s);

// A sentence closes after any token made only of . ! ?
std::vector<SentenceSpan> split_sentences(std::span<const Token> tokens);

std::string lemmatize(std::string_view lower_word);

// Penn-style tags from a closed-class table and suffix rules; NN fallback.
void tag_pos(std::span<Token> tokens, std::span<const SentenceSpan> sentences);

AnalyzedText analyze(std::string_view text);
AnalyzedText analyze(std::string_view text, const SidecarRecord* sidecar);

std::string detokenize(const AnalyzedText& a);

// --- sentiment -----------------------------------------------------------

struct SentimentScores {
    double positive = 0.0;
    double neutral = 1.0;
    double negative = 0.0;
    double compound = 0.0;
};

class SentimentAnalyzer {
public:
    static constexpr double kAlpha = 15.0;
    static constexpr double kNegationScale = -0.74;
    static constexpr double kBoost = 0.293;
    static constexpr std::size_t kNegationWindow = 3;

    SentimentAnalyzer() = default;
    explicit SentimentAnalyzer(std::unordered_map<std::string, double> valence);

    // Compiled-in valence table.
    static const SentimentAnalyzer& builtin();
    // "word<TAB>valence" per line, # comments.
    static SentimentAnalyzer read_file(const std::filesystem::path& path);

    SentimentScores score(const AnalyzedText& a) const;
    // Token valences after negation and intensifier adjustment.
    std::vector<double> token_valences(const AnalyzedText& a) const;
    std::optional<double> valence(std::string_view lower_word) const;

private:
    std::unordered_map<std::string, double> valence_;
};

SentimentScores sentiment(const AnalyzedText& a);

// Maps a signed valence sum onto (-1, 1).
double normalize_compound(double sum, double alpha = SentimentAnalyzer::kAlpha);

// --- word lists ----------------------------------------------------------

enum class TokenField { Surface, Lowercase, Lemma };

class Lexicon {
public:
    Lexicon() = default;
    // Entries are normalized with the tokenizer (lowercased unless case_sensitive).
    Lexicon(std::string name, const std::vector<std::string>& entries, bool case_sensitive = false);

    // One entry per line, # starts a comment. Throws InputError when no entry survives.
    static Lexicon read_file(const std::filesystem::path& path, std::string name, bool case_sensitive = false);

    const std::string& name() const { return name_; }
    bool case_sensitive() const { return case_sensitive_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool contains(std::string_view normalized) const;
    const std::unordered_set<std::string>& entries() const { return entries_; }
    std::size_t max_phrase_tokens() const { return max_phrase_; }

private:
    std::string name_;
    bool case_sensitive_ = false;
    std::unordered_set<std::string> entries_;
    std::size_t max_phrase_ = 0;
};

// True iff some token, or contiguous run of tokens for phrase entries, matches.
bool lexicon_hit(const Lexicon& lex, const AnalyzedText& a, TokenField field);

// Substring match of single-word entries (3+ bytes) inside a lowercased username.
bool username_hit(const Lexicon& lex, std::string_view username);

// --- embeddings ----------------------------------------------------------

class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {}

    // "word v1 ... vd" per line; d fixed by the first line.
    static EmbeddingTable read(std::istream& in);
    static EmbeddingTable read_file(const std::filesystem::path& path);

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return index_.size(); }
    void add(std::string word, std::span<const double> vector);
    // nullptr when absent; otherwise points at dimension() values.
    const double* find(std::string_view word) const;

private:
    std::size_t dim_ = 0;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<double> values_;
};

// Mean over lowercase token occurrences found in the table; zero vector if none.
std::vector<double> embed_average(const EmbeddingTable& table, const AnalyzedText& a);

// --- bundled resources ---------------------------------------------------

struct LinguisticResources {
    Lexicon emoticons;
    Lexicon harmful;
    Lexicon emotion;
    Lexicon swear;
    Lexicon politeness;
    std::optional<EmbeddingTable> embeddings;
    SentimentAnalyzer sentiment = SentimentAnalyzer::builtin();
    SidecarIndex sidecar;

    // Loads lexicons/{emoticons,harmful,emotion,swear,politeness}.txt and, when
    // given, an embedding file (relative paths resolve against dir).
    static LinguisticResources load(const std::filesystem::path& dir,
                                    const std::optional<std::filesystem::path>& embeddings = std::nullopt);
};

} // namespace trollkit
