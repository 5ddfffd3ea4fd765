#include <cctype>
#include <unordered_map>

#include "trollkit/linguistics.hpp"

namespace trollkit {

namespace {

const std::unordered_map<std::string_view, std::string_view>& lemma_exceptions()
{
    static const std::unordered_map<std::string_view, std::string_view> table = {
        {"am", "be"},       {"is", "be"},         {"are", "be"},       {"was", "be"},
        {"were", "be"},     {"been", "be"},       {"being", "be"},     {"'m", "be"},
        {"'re", "be"},      {"has", "have"},      {"had", "have"},     {"'ve", "have"},
        {"does", "do"},     {"did", "do"},        {"done", "do"},      {"doing", "do"},
        {"n't", "not"},     {"'ll", "will"},      {"'d", "would"},     {"ca", "can"},
        {"wo", "will"},     {"went", "go"},       {"gone", "go"},      {"goes", "go"},
        {"said", "say"},    {"says", "say"},      {"made", "make"},    {"got", "get"},
        {"came", "come"},   {"saw", "see"},       {"seen", "see"},     {"took", "take"},
        {"taken", "take"},  {"knew", "know"},     {"known", "know"},   {"thought", "think"},
        {"told", "tell"},   {"found", "find"},    {"gave", "give"},    {"given", "give"},
        {"left", "leave"},  {"felt", "feel"},     {"kept", "keep"},    {"ran", "run"},
        {"wrote", "write"}, {"written", "write"}, {"ate", "eat"},      {"eaten", "eat"},
        {"won", "win"},     {"lost", "lose"},     {"paid", "pay"},     {"meant", "mean"},
        {"heard", "hear"},  {"brought", "bring"}, {"bought", "buy"},   {"taught", "teach"},
        {"people", "people"}, {"men", "man"},     {"women", "woman"},  {"children", "child"},
        {"feet", "foot"},   {"teeth", "tooth"},   {"mice", "mouse"},   {"geese", "goose"},
        {"hoped", "hope"},  {"liked", "like"},    {"loved", "love"},   {"hated", "hate"},
        {"used", "use"},    {"named", "name"},    {"moved", "move"},   {"closed", "close"},
        {"lived", "live"},  {"believed", "believe"}, {"decided", "decide"}, {"joked", "joke"},
        {"hoping", "hope"}, {"liking", "like"},   {"loving", "love"},  {"hating", "hate"},
        {"using", "use"},   {"making", "make"},   {"having", "have"},  {"taking", "take"},
        {"giving", "give"}, {"joking", "joke"},   {"writing", "write"}, {"coming", "come"},
        {"this", "this"},   {"his", "his"},       {"its", "its"},      {"us", "us"},
        {"yes", "yes"},     {"news", "news"},     {"always", "always"}, {"sometimes", "sometimes"},
        {"thanks", "thanks"}, {"series", "series"}, {"species", "species"},
        {"better", "better"}, {"worse", "worse"},
    };
    return table;
}

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// stopp -> stop, runn -> run; ll/ss/zz/ff stay (kill, miss).
std::string undouble(std::string stem)
{
    constexpr std::string_view doubling = "bdgmnprt";
    const auto n = stem.size();
    if (n >= 4 && stem[n - 1] == stem[n - 2] && doubling.find(stem[n - 1]) != std::string_view::npos)
        stem.pop_back();
    return stem;
}

bool all_alpha(std::string_view w)
{
    if (w.empty())
        return false;
    for (char c : w) {
        auto u = static_cast<unsigned char>(c);
        if (!(std::isalpha(u) || c == '-' || c == '\'' || u >= 0x80))
            return false;
    }
    return true;
}

} // namespace

std::string lemmatize(std::string_view w)
{
    auto exc = lemma_exceptions().find(w);
    if (exc != lemma_exceptions().end())
        return std::string(exc->second);
    if (!all_alpha(w))
        return std::string(w);

    const std::string s(w);
    const auto n = s.size();
    if (n > 4 && ends_with(s, "ies"))
        return s.substr(0, n - 3) + "y";
    if (n > 4 && (ends_with(s, "sses") || ends_with(s, "ches") || ends_with(s, "shes") || ends_with(s, "xes") ||
                  ends_with(s, "zes")))
        return s.substr(0, n - 2);
    if (n > 3 && ends_with(s, "s") && !ends_with(s, "ss") && !ends_with(s, "us") && !ends_with(s, "is"))
        return s.substr(0, n - 1);
    if (n > 4 && ends_with(s, "ied"))
        return s.substr(0, n - 3) + "y";
    if (n > 4 && ends_with(s, "ed") && !ends_with(s, "eed"))
        return undouble(s.substr(0, n - 2));
    if (n > 5 && ends_with(s, "ing"))
        return undouble(s.substr(0, n - 3));
    return s;
}

namespace {

const std::unordered_map<std::string_view, std::string_view>& closed_class()
{
    static const std::unordered_map<std::string_view, std::string_view> table = {
        {"the", "DT"},     {"a", "DT"},       {"an", "DT"},       {"this", "DT"},     {"that", "DT"},
        {"these", "DT"},   {"those", "DT"},   {"every", "DT"},    {"each", "DT"},     {"some", "DT"},
        {"any", "DT"},     {"no", "DT"},      {"all", "DT"},      {"both", "DT"},     {"another", "DT"},
        {"i", "PRP"},      {"you", "PRP"},    {"he", "PRP"},      {"she", "PRP"},     {"it", "PRP"},
        {"we", "PRP"},     {"they", "PRP"},   {"me", "PRP"},      {"him", "PRP"},     {"us", "PRP"},
        {"them", "PRP"},   {"myself", "PRP"}, {"yourself", "PRP"}, {"himself", "PRP"}, {"herself", "PRP"},
        {"itself", "PRP"}, {"themselves", "PRP"}, {"my", "PRP$"},  {"your", "PRP$"},   {"his", "PRP$"},
        {"her", "PRP$"},   {"its", "PRP$"},   {"our", "PRP$"},    {"their", "PRP$"},  {"of", "IN"},
        {"in", "IN"},      {"on", "IN"},      {"at", "IN"},       {"by", "IN"},       {"for", "IN"},
        {"with", "IN"},    {"about", "IN"},   {"against", "IN"},  {"between", "IN"},  {"into", "IN"},
        {"through", "IN"}, {"during", "IN"},  {"before", "IN"},   {"after", "IN"},    {"above", "IN"},
        {"below", "IN"},   {"from", "IN"},    {"over", "IN"},     {"under", "IN"},    {"than", "IN"},
        {"as", "IN"},      {"if", "IN"},      {"because", "IN"},  {"while", "IN"},    {"since", "IN"},
        {"until", "IN"},   {"like", "IN"},    {"without", "IN"},  {"to", "TO"},       {"and", "CC"},
        {"or", "CC"},      {"but", "CC"},     {"nor", "CC"},      {"yet", "CC"},      {"can", "MD"},
        {"could", "MD"},   {"will", "MD"},    {"would", "MD"},    {"shall", "MD"},    {"should", "MD"},
        {"may", "MD"},     {"might", "MD"},   {"must", "MD"},     {"ca", "MD"},       {"wo", "MD"},
        {"'ll", "MD"},     {"'d", "MD"},      {"is", "VBZ"},      {"has", "VBZ"},     {"does", "VBZ"},
        {"was", "VBD"},    {"were", "VBD"},   {"had", "VBD"},     {"did", "VBD"},     {"am", "VBP"},
        {"are", "VBP"},    {"have", "VBP"},   {"do", "VBP"},      {"'re", "VBP"},     {"'m", "VBP"},
        {"'ve", "VBP"},    {"be", "VB"},      {"been", "VBN"},    {"being", "VBG"},   {"'s", "POS"},
        {"not", "RB"},     {"n't", "RB"},     {"very", "RB"},     {"really", "RB"},   {"too", "RB"},
        {"also", "RB"},    {"just", "RB"},    {"never", "RB"},    {"always", "RB"},   {"often", "RB"},
        {"here", "RB"},    {"there", "RB"},   {"now", "RB"},      {"then", "RB"},     {"so", "RB"},
        {"even", "RB"},    {"still", "RB"},   {"again", "RB"},    {"who", "WP"},      {"what", "WP"},
        {"whom", "WP"},    {"which", "WDT"},  {"how", "WRB"},     {"why", "WRB"},     {"when", "WRB"},
        {"where", "WRB"},  {"yeah", "UH"},    {"yes", "UH"},      {"lol", "UH"},      {"haha", "UH"},
        {"ok", "UH"},      {"okay", "UH"},    {"oh", "UH"},       {"hey", "UH"},      {"wow", "UH"},
        {"please", "UH"},  {"thanks", "UH"},  {"good", "JJ"},     {"bad", "JJ"},      {"stupid", "JJ"},
        {"great", "JJ"},   {"nice", "JJ"},    {"dumb", "JJ"},     {"little", "JJ"},   {"big", "JJ"},
        {"new", "JJ"},     {"old", "JJ"},     {"same", "JJ"},     {"other", "JJ"},    {"sure", "JJ"},
        {"aware", "JJ"},   {"best", "JJS"},   {"worst", "JJS"},   {"better", "JJR"},  {"worse", "JJR"},
        {"adorable", "JJ"}, {"mean", "JJ"},   {"wrong", "JJ"},    {"right", "JJ"},    {"funny", "JJ"},
    };
    return table;
}

bool has_digit(std::string_view s)
{
    for (char c : s)
        if (std::isdigit(static_cast<unsigned char>(c)))
            return true;
    return false;
}

std::string tag_one(const Token& t, bool sentence_initial)
{
    if (is_emoticon(t.surface))
        return "SYM";
    auto first = static_cast<unsigned char>(t.surface.front());
    if (!(std::isalnum(first) || first >= 0x80 || first == '\'')) {
        if (t.surface == "," || t.surface == ":" || t.surface == ";")
            return t.surface == "," ? "," : ":";
        bool terminal = true;
        for (char c : t.surface)
            terminal = terminal && (c == '.' || c == '!' || c == '?');
        return terminal ? "." : "SYM";
    }
    if (auto it = closed_class().find(t.lower); it != closed_class().end())
        return std::string(it->second);
    if (has_digit(t.lower))
        return "CD";
    const std::string& w = t.lower;
    if (!sentence_initial && std::isupper(first))
        return "NNP";
    if (ends_with(w, "ly") && w.size() > 3)
        return "RB";
    if (ends_with(w, "ing") && w.size() > 4)
        return "VBG";
    if (ends_with(w, "ed") && w.size() > 3)
        return "VBD";
    for (std::string_view adj : {"ous", "ful", "ive", "able", "ible", "less", "ish", "ic"})
        if (ends_with(w, adj) && w.size() > adj.size() + 2)
            return "JJ";
    if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() > 3)
        return "NNS";
    return "NN";
}

} // namespace

void tag_pos(std::span<Token> tokens, std::span<const SentenceSpan> sentences)
{
    std::vector<bool> initial(tokens.size(), false);
    for (const auto& s : sentences)
        if (s.first < tokens.size())
            initial[s.first] = true;
    if (sentences.empty() && !tokens.empty())
        initial[0] = true;
    for (std::size_t k = 0; k < tokens.size(); ++k)
        tokens[k].pos = tag_one(tokens[k], initial[k]);
}

} // namespace trollkit
