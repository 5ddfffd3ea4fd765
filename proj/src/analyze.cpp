#include <fstream>
#include <istream>

#include <json.hpp>

#include "trollkit/errors.hpp"
#include "trollkit/linguistics.hpp"

namespace trollkit {

using nlohmann::json;

AnalyzedText analyze(std::string_view text)
{
    return analyze(text, nullptr);
}

namespace {

// Sidecar tokens carry no offsets; recover them by scanning forward in raw.
void locate_tokens(AnalyzedText& a)
{
    std::size_t cursor = 0;
    for (auto& t : a.tokens) {
        auto at = a.raw.find(t.surface, cursor);
        if (at == std::string::npos) {
            t.begin = t.end = cursor;
        } else {
            t.begin = at;
            t.end = at + t.surface.size();
            cursor = t.end;
        }
    }
}

} // namespace

AnalyzedText analyze(std::string_view text, const SidecarRecord* sidecar)
{
    AnalyzedText a;
    a.raw = std::string(text);

    if (sidecar && !sidecar->tokens.empty()) {
        for (const auto& s : sidecar->tokens) {
            Token t;
            t.surface = s;
            t.lower = to_lower(s);
            a.tokens.push_back(std::move(t));
        }
        locate_tokens(a);
    } else {
        a.tokens = tokenize(text);
    }

    if (sidecar && !sidecar->sentences.empty())
        a.sentences = sidecar->sentences;
    else
        a.sentences = split_sentences(a.tokens);

    const bool own_lemmas = sidecar && sidecar->lemmas.size() == a.tokens.size() && !a.tokens.empty();
    for (std::size_t k = 0; k < a.tokens.size(); ++k) {
        auto& t = a.tokens[k];
        t.lemma = own_lemmas ? to_lower(sidecar->lemmas[k]) : lemmatize(t.lower);
        if (t.lemma.empty())
            t.lemma = t.lower;
    }

    if (sidecar && sidecar->pos.size() == a.tokens.size() && !a.tokens.empty()) {
        for (std::size_t k = 0; k < a.tokens.size(); ++k)
            a.tokens[k].pos = sidecar->pos[k].empty() ? "NN" : sidecar->pos[k];
    } else {
        tag_pos(a.tokens, a.sentences);
    }

    if (sidecar)
        a.frames = sidecar->frames;
    return a;
}

// --- sidecar --------------------------------------------------------------

const SidecarRecord* SidecarIndex::find(std::string_view comment_id) const
{
    auto it = records_.find(std::string(comment_id));
    return it == records_.end() ? nullptr : &it->second;
}

void SidecarIndex::add(SidecarRecord record)
{
    auto id = record.id;
    records_[id] = std::move(record);
}

namespace {

SidecarRecord sidecar_from_json(const json& j)
{
    SidecarRecord r;
    r.id = j.at("id").get<std::string>();
    r.tokens = j.value("tokens", std::vector<std::string>{});
    r.lemmas = j.value("lemmas", std::vector<std::string>{});
    r.pos = j.value("pos", std::vector<std::string>{});
    if (!r.lemmas.empty() && r.lemmas.size() != r.tokens.size())
        throw InputError("sidecar " + r.id + ": lemmas and tokens differ in length");
    if (!r.pos.empty() && r.pos.size() != r.tokens.size())
        throw InputError("sidecar " + r.id + ": pos and tokens differ in length");
    if (auto it = j.find("sentences"); it != j.end()) {
        for (const auto& span : *it) {
            SentenceSpan s{span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
            if (s.first > s.last || s.last > r.tokens.size())
                throw InputError("sidecar " + r.id + ": sentence span out of range");
            r.sentences.push_back(s);
        }
    }
    if (auto it = j.find("frames"); it != j.end()) {
        for (const auto& fj : *it) {
            Frame f;
            f.name = fj.at("name").get<std::string>();
            f.target = fj.value("target", std::string());
            if (auto ait = fj.find("arguments"); ait != fj.end())
                for (const auto& aj : *ait)
                    f.arguments.push_back({aj.at("name").get<std::string>(), aj.value("text", std::string())});
            r.frames.push_back(std::move(f));
        }
    }
    return r;
}

} // namespace

SidecarIndex SidecarIndex::read(std::istream& in)
{
    SidecarIndex index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("sidecar line " + std::to_string(lineno) + " is not JSON");
        try {
            index.add(sidecar_from_json(j));
        } catch (const json::exception& e) {
            throw InputError("sidecar line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return index;
}

SidecarIndex SidecarIndex::read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot open sidecar " + path.string());
    return read(in);
}

} // namespace trollkit
