#include <algorithm>
#include <fstream>
#include <sstream>

#include "trollkit/errors.hpp"
#include "trollkit/linguistics.hpp"

namespace trollkit {

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

Lexicon::Lexicon(std::string name, const std::vector<std::string>& entries, bool case_sensitive)
    : name_(std::move(name)), case_sensitive_(case_sensitive)
{
    for (const auto& raw : entries) {
        std::string entry = trim(raw);
        if (entry.empty())
            continue;
        auto toks = tokenize(entry);
        if (toks.empty())
            continue;
        std::string normalized;
        for (const auto& t : toks) {
            if (!normalized.empty())
                normalized += ' ';
            normalized += case_sensitive_ ? t.surface : t.lower;
        }
        max_phrase_ = std::max(max_phrase_, toks.size());
        entries_.insert(std::move(normalized));
    }
}

Lexicon Lexicon::read_file(const std::filesystem::path& path, std::string name, bool case_sensitive)
{
    std::ifstream in(path);
    if (!in)
        throw IngestionError("cannot open lexicon " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        lines.push_back(std::move(t));
    }
    Lexicon lex(std::move(name), lines, case_sensitive);
    if (lex.empty())
        throw InputError("lexicon " + path.string() + " has no entries");
    return lex;
}

bool Lexicon::contains(std::string_view normalized) const
{
    return entries_.count(std::string(normalized)) > 0;
}

namespace {

const std::string& pick(const Token& t, TokenField field, bool case_sensitive)
{
    switch (field) {
    case TokenField::Surface: return case_sensitive ? t.surface : t.lower;
    case TokenField::Lowercase: return t.lower;
    case TokenField::Lemma: return t.lemma;
    }
    return t.lower;
}

} // namespace

bool lexicon_hit(const Lexicon& lex, const AnalyzedText& a, TokenField field)
{
    if (lex.empty())
        return false;
    const auto& toks = a.tokens;
    const bool exact = lex.case_sensitive();
    for (std::size_t i = 0; i < toks.size(); ++i) {
        std::string phrase;
        for (std::size_t len = 1; len <= lex.max_phrase_tokens() && i + len <= toks.size(); ++len) {
            if (len > 1)
                phrase += ' ';
            phrase += pick(toks[i + len - 1], field, exact);
            if (lex.contains(phrase))
                return true;
        }
    }
    return false;
}

bool username_hit(const Lexicon& lex, std::string_view username)
{
    if (username.empty())
        return false;
    std::string name = to_lower(username);
    for (const auto& e : lex.entries()) {
        if (e.size() < 3 || e.find(' ') != std::string::npos)
            continue;
        if (name.find(e) != std::string::npos)
            return true;
    }
    return false;
}

// --- embeddings ----------------------------------------------------------

void EmbeddingTable::add(std::string word, std::span<const double> vector)
{
    if (dim_ == 0)
        dim_ = vector.size();
    if (vector.size() != dim_)
        throw InputError("embedding for '" + word + "' has " + std::to_string(vector.size()) +
                         " values, expected " + std::to_string(dim_));
    auto [it, fresh] = index_.emplace(std::move(word), values_.size() / std::max<std::size_t>(dim_, 1));
    if (!fresh)
        std::copy(vector.begin(), vector.end(), values_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    else
        values_.insert(values_.end(), vector.begin(), vector.end());
}

const double* EmbeddingTable::find(std::string_view word) const
{
    auto it = index_.find(std::string(word));
    if (it == index_.end())
        return nullptr;
    return values_.data() + it->second * dim_;
}

EmbeddingTable EmbeddingTable::read(std::istream& in)
{
    EmbeddingTable table;
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields(line);
        std::string word;
        if (!(fields >> word))
            continue;
        values.clear();
        std::string v;
        while (fields >> v) {
            char* end = nullptr;
            double x = std::strtod(v.c_str(), &end);
            if (end == v.c_str() || *end != '\0')
                throw InputError("embedding line " + std::to_string(lineno) + ": bad value '" + v + "'");
            values.push_back(x);
        }
        if (values.empty())
            throw InputError("embedding line " + std::to_string(lineno) + " has no values");
        if (table.dim_ != 0 && values.size() != table.dim_)
            throw InputError("embedding line " + std::to_string(lineno) + " has " + std::to_string(values.size()) +
                             " values, expected " + std::to_string(table.dim_));
        table.add(std::move(word), values);
    }
    return table;
}

EmbeddingTable EmbeddingTable::read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IngestionError("cannot open embeddings " + path.string());
    return read(in);
}

std::vector<double> embed_average(const EmbeddingTable& table, const AnalyzedText& a)
{
    std::vector<double> mean(table.dimension(), 0.0);
    std::size_t found = 0;
    for (const auto& t : a.tokens) {
        const double* v = table.find(t.lower);
        if (!v)
            continue;
        ++found;
        for (std::size_t d = 0; d < mean.size(); ++d)
            mean[d] += v[d];
    }
    if (found > 0)
        for (auto& x : mean)
            x /= static_cast<double>(found);
    return mean;
}

// --- bundle ---------------------------------------------------------------

LinguisticResources LinguisticResources::load(const std::filesystem::path& dir,
                                              const std::optional<std::filesystem::path>& embeddings)
{
    LinguisticResources r;
    const auto lex = dir / "lexicons";
    r.emoticons = Lexicon::read_file(lex / "emoticons.txt", "emoticons", /*case_sensitive=*/true);
    r.harmful = Lexicon::read_file(lex / "harmful.txt", "harmful");
    r.emotion = Lexicon::read_file(lex / "emotion.txt", "emotion_synsets");
    r.swear = Lexicon::read_file(lex / "swear.txt", "swear");
    r.politeness = Lexicon::read_file(lex / "politeness.txt", "politeness");
    if (std::filesystem::exists(lex / "valence.txt"))
        r.sentiment = SentimentAnalyzer::read_file(lex / "valence.txt");
    if (embeddings) {
        auto path = embeddings->is_absolute() || std::filesystem::exists(*embeddings) ? *embeddings : dir / *embeddings;
        r.embeddings = EmbeddingTable::read_file(path);
    }
    return r;
}

} // namespace trollkit
