#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "trollkit/errors.hpp"
#include "trollkit/linguistics.hpp"

namespace trollkit {

namespace {

// Mean human valence ratings on a -4..4 scale, in the style of the VADER lexicon.
const std::unordered_map<std::string, double>& builtin_valence()
{
    static const std::unordered_map<std::string, double> table = {
        // positive
        {"good", 1.9}, {"great", 3.1}, {"nice", 1.8}, {"love", 3.2}, {"loved", 2.9}, {"lovely", 2.8},
        {"like", 1.5}, {"liked", 1.8}, {"happy", 2.7}, {"glad", 2.0}, {"hope", 1.9}, {"hopeful", 1.6},
        {"thanks", 1.9}, {"thank", 1.5}, {"please", 1.3}, {"welcome", 2.0}, {"awesome", 3.1},
        {"amazing", 2.8}, {"brilliant", 2.8}, {"genius", 2.0}, {"clever", 1.9}, {"smart", 1.7},
        {"excellent", 2.7}, {"wonderful", 2.7}, {"beautiful", 2.9}, {"adorable", 2.2}, {"cute", 2.0},
        {"fun", 2.3}, {"funny", 1.9}, {"haha", 2.0}, {"hahaha", 2.6}, {"lol", 1.8}, {"lmao", 2.0},
        {"best", 3.2}, {"better", 1.9}, {"cool", 1.3}, {"agree", 1.5}, {"helpful", 1.8}, {"kind", 2.4},
        {"friend", 2.2}, {"friendly", 2.2}, {"safe", 1.9}, {"calm", 1.3}, {"relief", 1.9}, {"proud", 2.1},
        {"pride", 1.4}, {"respect", 2.1}, {"fair", 1.3}, {"win", 2.8}, {"winning", 2.4}, {"yay", 2.4},
        {"enjoy", 2.2}, {"enjoyed", 2.3}, {"perfect", 2.7}, {"fantastic", 2.6}, {"sweet", 2.0},
        {"interesting", 1.7}, {"appreciate", 1.7}, {"appreciated", 2.3}, {"sorry", -0.3}, {"ok", 0.9},
        {"okay", 0.9}, {"yes", 1.7}, {"wow", 2.8}, {"impressive", 2.3}, {"true", 1.6}, {"right", 0.6},
        {"praise", 2.6}, {"honest", 2.3}, {"peace", 2.5}, {"support", 1.7}, {"care", 2.2}, {"empathy", 1.7},
        {":)", 2.0}, {":-)", 2.0}, {":D", 2.3}, {":-D", 2.3}, {";)", 1.9}, {";-)", 1.9}, {":P", 1.4},
        {"<3", 1.9}, {"xD", 2.3}, {"^_^", 2.3},
        // negative
        {"bad", -2.5}, {"terrible", -2.1}, {"awful", -2.0}, {"horrible", -2.5}, {"worst", -3.1},
        {"worse", -2.1}, {"hate", -2.7}, {"hated", -3.2}, {"hates", -1.9}, {"hating", -2.3},
        {"kill", -3.7}, {"kills", -2.5}, {"killed", -3.5}, {"die", -2.9}, {"dead", -3.3}, {"death", -2.9},
        {"cancer", -3.4}, {"hurt", -2.4}, {"harm", -2.5}, {"pain", -2.3}, {"sad", -2.1}, {"sadness", -1.9},
        {"angry", -2.3}, {"anger", -2.7}, {"mad", -2.2}, {"fear", -2.2}, {"afraid", -2.2}, {"scared", -1.9},
        {"stupid", -2.4}, {"dumb", -2.3}, {"idiot", -2.3}, {"idiots", -2.2}, {"moron", -2.2},
        {"fool", -1.9}, {"loser", -2.4}, {"pathetic", -2.6}, {"ugly", -2.3}, {"wrong", -2.1},
        {"troll", -0.8}, {"trolls", -0.8}, {"trolling", -0.8}, {"annoying", -1.7}, {"annoyed", -1.6},
        {"disgusting", -2.4}, {"shame", -2.1}, {"embarrassing", -1.6}, {"embarrassed", -1.5},
        {"shit", -2.6}, {"crap", -1.6}, {"damn", -1.7}, {"hell", -3.6}, {"fuck", -2.5}, {"fucking", -1.8},
        {"ass", -2.5}, {"asshole", -2.5}, {"bitch", -2.8}, {"bastard", -3.0}, {"sucks", -1.5},
        {"suck", -1.9}, {"boring", -1.3}, {"lie", -1.6}, {"liar", -2.9}, {"lies", -1.8}, {"fake", -2.1},
        {"fail", -2.5}, {"failed", -2.3}, {"useless", -1.8}, {"worthless", -1.9}, {"trash", -1.5},
        {"garbage", -1.6}, {"disgrace", -2.1}, {"threat", -2.4}, {"violent", -2.9}, {"bullet", -1.2},
        {"rape", -3.7}, {"racist", -3.1}, {"ignorant", -1.6}, {"clueless", -1.5}, {"nonsense", -1.7},
        {"hostile", -2.2}, {"offensive", -2.2}, {"rude", -2.0}, {"attack", -2.1}, {"problem", -1.7},
        {"cry", -2.1}, {"crying", -2.1}, {"frustrated", -1.9}, {"frustrating", -1.9}, {"no", -1.2},
        {"ignore", -0.6}, {"whatever", -0.3}, {"jerk", -2.3}, {"creep", -2.0}, {"sick", -2.3},
        {":(", -1.9}, {":-(", -1.9}, {":'(", -2.2}, {":/", -1.1}, {"-_-", -1.0}, {">:(", -2.6},
    };
    return table;
}

const std::unordered_set<std::string>& negations()
{
    static const std::unordered_set<std::string> words = {
        "not",   "n't",    "no",     "never",  "none",    "nobody", "nothing", "nowhere", "neither",
        "nor",   "cannot", "without", "aint",  "dont",    "doesnt", "didnt",   "isnt",    "wasnt",
        "werent", "wont",  "wouldnt", "cant",  "couldnt", "shouldnt", "hardly", "rarely", "seldom"};
    return words;
}

const std::unordered_map<std::string, double>& boosters()
{
    constexpr double up = SentimentAnalyzer::kBoost;
    constexpr double down = -SentimentAnalyzer::kBoost;
    static const std::unordered_map<std::string, double> words = {
        {"absolutely", up}, {"completely", up}, {"extremely", up}, {"really", up},    {"so", up},
        {"totally", up},    {"very", up},       {"incredibly", up}, {"utterly", up},    {"truly", up},
        {"highly", up},     {"super", up},      {"most", up},       {"such", up},       {"too", up},
        {"barely", down},   {"slightly", down}, {"somewhat", down}, {"kinda", down},    {"almost", down},
        {"little", down},   {"marginally", down}, {"partly", down}, {"sorta", down},
    };
    return words;
}

} // namespace

double normalize_compound(double sum, double alpha)
{
    return sum / std::sqrt(sum * sum + alpha);
}

SentimentAnalyzer::SentimentAnalyzer(std::unordered_map<std::string, double> valence) : valence_(std::move(valence))
{
}

const SentimentAnalyzer& SentimentAnalyzer::builtin()
{
    static const SentimentAnalyzer analyzer(builtin_valence());
    return analyzer;
}

SentimentAnalyzer SentimentAnalyzer::read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IngestionError("cannot open valence lexicon " + path.string());
    std::unordered_map<std::string, double> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos && hash == line.find_first_not_of(" \t"))
            continue;
        std::istringstream fields(line);
        std::string word;
        double v = 0.0;
        if (!(fields >> word))
            continue;
        if (!(fields >> v))
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": missing valence");
        table[word] = v;
    }
    if (table.empty())
        throw InputError("valence lexicon " + path.string() + " is empty");
    return SentimentAnalyzer(std::move(table));
}

std::optional<double> SentimentAnalyzer::valence(std::string_view word) const
{
    auto it = valence_.find(std::string(word));
    if (it == valence_.end())
        return std::nullopt;
    return it->second;
}

std::vector<double> SentimentAnalyzer::token_valences(const AnalyzedText& a) const
{
    const auto& toks = a.tokens;
    std::vector<double> out(toks.size(), 0.0);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (boosters().count(toks[i].lower))
            continue;
        // Emoticons are case-sensitive (":D" vs ":d").
        auto v = valence(toks[i].surface);
        if (!v)
            v = valence(toks[i].lower);
        if (!v)
            v = valence(toks[i].lemma);
        if (!v || *v == 0.0)
            continue;
        double score = *v;

        constexpr double window_decay[] = {1.0, 0.95, 0.9};
        for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
            auto b = boosters().find(toks[i - back].lower);
            if (b != boosters().end())
                score += (score > 0 ? 1.0 : -1.0) * b->second * window_decay[back - 1];
        }
        for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
            if (negations().count(toks[i - back].lower)) {
                score *= kNegationScale;
                break;
            }
        }
        out[i] = score;
    }
    return out;
}

SentimentScores SentimentAnalyzer::score(const AnalyzedText& a) const
{
    auto valences = token_valences(a);
    double sum = 0.0, pos = 0.0, neg = 0.0, neu = 0.0;
    for (std::size_t i = 0; i < valences.size(); ++i) {
        double v = valences[i];
        sum += v;
        if (v > 0)
            pos += v + 1.0;
        else if (v < 0)
            neg += -v + 1.0;
        else if (!a.tokens[i].pos.empty() && a.tokens[i].pos != "." && a.tokens[i].pos != "," &&
                 a.tokens[i].pos != ":")
            neu += 1.0;
    }
    SentimentScores s;
    const double total = pos + neg + neu;
    if (total == 0.0)
        return s;
    s.positive = pos / total;
    s.negative = neg / total;
    s.neutral = neu / total;
    s.compound = normalize_compound(sum);
    return s;
}

SentimentScores sentiment(const AnalyzedText& a)
{
    return SentimentAnalyzer::builtin().score(a);
}

} // namespace trollkit
