#include "trollkit/features.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "trollkit/errors.hpp"
#include "trollkit/parallel.hpp"

namespace trollkit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 10> kGroupNames{"ngr", "pol", "emt", "hrm", "syn",
                                                       "swr", "usr", "frm", "cue", "glv"};

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string_view group_name(FeatureGroup g)
{
    return kGroupNames[static_cast<std::size_t>(g)];
}

FeatureGroup parse_group(std::string_view name)
{
    for (std::size_t i = 0; i < kGroupNames.size(); ++i)
        if (kGroupNames[i] == name)
            return static_cast<FeatureGroup>(i);
    throw InputError("unknown feature group '" + std::string(name) + "'");
}

GroupSet parse_groups(std::string_view list)
{
    GroupSet out;
    std::size_t start = 0;
    while (start <= list.size()) {
        auto comma = list.find(',', start);
        auto item = list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (item == "all")
            out.insert(kAllGroups.begin(), kAllGroups.end());
        else if (!item.empty())
            out.insert(parse_group(item));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::string format_groups(const GroupSet& groups)
{
    std::string out;
    for (auto g : groups) {
        if (!out.empty())
            out += ',';
        out += group_name(g);
    }
    return out;
}

// --- space ----------------------------------------------------------------

std::string FeatureSpace::composite(const FeatureKey& key)
{
    std::string s(group_name(key.group));
    s += ':';
    s += key.name;
    return s;
}

std::optional<std::uint32_t> FeatureSpace::find(const FeatureKey& key) const
{
    auto it = index_.find(composite(key));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> FeatureSpace::intern(const FeatureKey& key)
{
    auto name = composite(key);
    auto it = index_.find(name);
    if (it != index_.end())
        return it->second;
    if (frozen_)
        return std::nullopt;
    auto idx = static_cast<std::uint32_t>(keys_.size());
    index_.emplace(std::move(name), idx);
    keys_.push_back(key);
    return idx;
}

std::string FeatureSpace::column_name(std::size_t column) const
{
    if (column < keys_.size())
        return composite(keys_[column]);
    return "glv:" + std::to_string(column - keys_.size());
}

// --- featurizer -----------------------------------------------------------

const Comment& source_comment(const Snippet& s, Aspect task, std::optional<std::size_t> response_index)
{
    if (is_attempt_aspect(task))
        return s.attempt;
    if (!response_index)
        throw InputError("task " + std::string(name(task)) + " needs a response index");
    if (*response_index >= s.responses.size())
        throw InputError("response index out of range for snippet " + s.snippet_id);
    return s.responses[*response_index];
}

Featurizer::Featurizer(const LinguisticResources& resources, FeatureOptions options)
    : resources_(&resources), options_(options)
{
}

Featurizer::CommentView Featurizer::view_of(const Comment& c) const
{
    const auto& r = *resources_;
    CommentView v;
    v.text = analyze(c.body, r.sidecar.find(c.id));
    v.sentiment = r.sentiment.score(v.text);
    if (r.embeddings)
        v.embedding = embed_average(*r.embeddings, v.text);
    v.emoticon = lexicon_hit(r.emoticons, v.text, TokenField::Surface);
    v.harmful = lexicon_hit(r.harmful, v.text, TokenField::Lowercase);
    v.emotion = lexicon_hit(r.emotion, v.text, TokenField::Lowercase) ||
                lexicon_hit(r.emotion, v.text, TokenField::Lemma);
    v.swear = lexicon_hit(r.swear, v.text, TokenField::Lowercase);
    v.politeness = lexicon_hit(r.politeness, v.text, TokenField::Lowercase);
    v.swear_username = username_hit(r.swear, c.author);
    return v;
}

void Featurizer::prepare(std::span<const Snippet> snippets)
{
    std::vector<const Comment*> todo;
    std::set<std::string> seen;
    auto want = [&](const Comment& c) {
        if (!cache_.count(c.id) && seen.insert(c.id).second)
            todo.push_back(&c);
    };
    for (const auto& s : snippets) {
        if (s.context)
            want(*s.context);
        want(s.attempt);
        for (const auto& r : s.responses)
            want(r);
    }
    std::vector<std::shared_ptr<const CommentView>> views(todo.size());
    const auto n = static_cast<std::ptrdiff_t>(todo.size());
    TROLLKIT_OMP_PARALLEL_FOR_DYNAMIC
    for (std::ptrdiff_t i = 0; i < n; ++i)
        views[static_cast<std::size_t>(i)] = std::make_shared<const CommentView>(view_of(*todo[static_cast<std::size_t>(i)]));
    for (std::size_t i = 0; i < todo.size(); ++i)
        cache_.emplace(todo[i]->id, std::move(views[i]));
}

std::size_t Featurizer::dense_width(const GroupSet& groups) const
{
    if (!groups.count(FeatureGroup::glv))
        return 0;
    if (!resources_->embeddings)
        throw InputError("feature group glv needs an embedding table");
    return resources_->embeddings->dimension();
}

template <typename Sink>
void Featurizer::emit_comment(const Comment& c, std::string_view prefix, const GroupSet& groups, Sink& sink,
                              std::vector<double>* dense) const
{
    std::shared_ptr<const CommentView> holder;
    if (auto it = cache_.find(c.id); it != cache_.end())
        holder = it->second;
    else
        holder = std::make_shared<const CommentView>(view_of(c));
    const CommentView& v = *holder;
    const std::string pre(prefix);

    auto flag = [&](FeatureGroup g, std::string_view key, bool on) {
        if (groups.count(g))
            sink(FeatureKey{g, pre + std::string(key)}, on ? 1.0 : 0.0);
    };

    if (groups.count(FeatureGroup::ngr)) {
        const auto& toks = v.text.tokens;
        for (const auto& sent : v.text.sentences) {
            for (std::size_t i = sent.first; i < sent.last; ++i) {
                const Token& t = toks[i];
                sink(FeatureKey{FeatureGroup::ngr, pre + "w:" + t.lower}, 1.0);
                sink(FeatureKey{FeatureGroup::ngr, pre + "l:" + t.lemma}, 1.0);
                sink(FeatureKey{FeatureGroup::ngr, pre + "wp:" + t.lower + "/" + t.pos}, 1.0);
                sink(FeatureKey{FeatureGroup::ngr, pre + "lp:" + t.lemma + "/" + t.pos}, 1.0);
                if (i + 1 < sent.last) {
                    const Token& u = toks[i + 1];
                    sink(FeatureKey{FeatureGroup::ngr, pre + "w:" + t.lower + " " + u.lower}, 1.0);
                    sink(FeatureKey{FeatureGroup::ngr, pre + "l:" + t.lemma + " " + u.lemma}, 1.0);
                    sink(FeatureKey{FeatureGroup::ngr,
                                    pre + "wp:" + t.lower + "/" + t.pos + " " + u.lower + "/" + u.pos},
                         1.0);
                    sink(FeatureKey{FeatureGroup::ngr,
                                    pre + "lp:" + t.lemma + "/" + t.pos + " " + u.lemma + "/" + u.pos},
                         1.0);
                }
            }
        }
    }
    if (groups.count(FeatureGroup::pol)) {
        sink(FeatureKey{FeatureGroup::pol, pre + "pos"}, v.sentiment.positive);
        sink(FeatureKey{FeatureGroup::pol, pre + "neu"}, v.sentiment.neutral);
        sink(FeatureKey{FeatureGroup::pol, pre + "neg"}, v.sentiment.negative);
        sink(FeatureKey{FeatureGroup::pol, pre + "compound"}, v.sentiment.compound);
    }
    flag(FeatureGroup::emt, "hit", v.emoticon);
    flag(FeatureGroup::hrm, "hit", v.harmful);
    flag(FeatureGroup::syn, "hit", v.emotion);
    flag(FeatureGroup::swr, "hit", v.swear);
    flag(FeatureGroup::usr, "hit", v.swear_username);
    flag(FeatureGroup::cue, "hit", v.politeness);
    if (groups.count(FeatureGroup::frm)) {
        for (const auto& f : v.text.frames) {
            sink(FeatureKey{FeatureGroup::frm, pre + "F:" + f.name}, 1.0);
            if (!f.target.empty())
                sink(FeatureKey{FeatureGroup::frm, pre + "FT:" + f.name + "|" + to_lower(f.target)}, 1.0);
            for (const auto& a : f.arguments)
                sink(FeatureKey{FeatureGroup::frm, pre + "A:" + a.name + "|" + to_lower(a.text)}, 1.0);
        }
    }
    if (dense && groups.count(FeatureGroup::glv)) {
        if (!resources_->embeddings)
            throw InputError("feature group glv needs an embedding table");
        *dense = v.embedding;
    }
}

template <typename Sink>
void Featurizer::emit_instance(const Snippet& s, Aspect task, std::optional<std::size_t> response_index,
                               const GroupSet& groups, Sink& sink, std::vector<double>* dense) const
{
    emit_comment(source_comment(s, task, response_index), "", groups, sink, dense);
    GroupSet sparse_only = groups;
    sparse_only.erase(FeatureGroup::glv);
    if (options_.with_parent && s.context)
        emit_comment(*s.context, "ctx.", sparse_only, sink, nullptr);
    if (options_.with_attempt && !is_attempt_aspect(task))
        emit_comment(s.attempt, "att.", sparse_only, sink, nullptr);
}

namespace {

void finish(FeatureVector& v)
{
    std::sort(v.sparse.begin(), v.sparse.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    v.sparse.erase(std::unique(v.sparse.begin(), v.sparse.end(),
                               [](const auto& a, const auto& b) { return a.first == b.first; }),
                   v.sparse.end());
}

} // namespace

FeatureVector Featurizer::featurize(const Snippet& s, Aspect task, std::optional<std::size_t> response_index,
                                    FeatureSpace& space, const GroupSet& groups) const
{
    if (space.frozen())
        return featurize(s, task, response_index, static_cast<const FeatureSpace&>(space), groups);
    FeatureVector out;
    auto sink = [&](const FeatureKey& key, double value) {
        auto idx = space.intern(key);
        if (idx && value != 0.0)
            out.sparse.emplace_back(*idx, value);
    };
    emit_instance(s, task, response_index, groups, sink, &out.dense);
    if (out.dense.empty())
        out.dense.assign(space.dense_width(), 0.0);
    finish(out);
    return out;
}

FeatureVector Featurizer::featurize(const Snippet& s, Aspect task, std::optional<std::size_t> response_index,
                                    const FeatureSpace& space, const GroupSet& groups) const
{
    FeatureVector out;
    auto sink = [&](const FeatureKey& key, double value) {
        if (value == 0.0)
            return;
        if (auto idx = space.find(key))
            out.sparse.emplace_back(*idx, value);
    };
    emit_instance(s, task, response_index, groups, sink, &out.dense);
    if (out.dense.empty())
        out.dense.assign(space.dense_width(), 0.0);
    finish(out);
    return out;
}

FeatureSpace Featurizer::build_space(std::span<const Snippet> snippets, std::span<const Instance> training,
                                     const GroupSet& groups) const
{
    if (training.empty())
        throw InputError("cannot build a feature space from an empty training set");
    FeatureSpace scratch(dense_width(groups));
    std::vector<std::size_t> df;
    std::vector<std::uint32_t> seen;
    for (const auto& inst : training) {
        seen.clear();
        auto sink = [&](const FeatureKey& key, double) {
            if (auto idx = scratch.intern(key))
                seen.push_back(*idx);
        };
        emit_instance(snippets[inst.snippet], inst.task, inst.response, groups, sink, nullptr);
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        df.resize(scratch.sparse_size(), 0);
        for (auto idx : seen)
            ++df[idx];
    }
    if (options_.min_df <= 1) {
        scratch.freeze();
        return scratch;
    }
    FeatureSpace kept(scratch.dense_width());
    for (std::size_t i = 0; i < scratch.sparse_size(); ++i)
        if (df[i] >= options_.min_df)
            kept.intern(scratch.keys()[i]);
    kept.freeze();
    return kept;
}

FeatureVector featurize(const Snippet& s, Aspect task, std::optional<std::size_t> response_index, FeatureSpace& space,
                        const GroupSet& groups, const LinguisticResources& resources, const FeatureOptions& options)
{
    Featurizer f(resources, options);
    return f.featurize(s, task, response_index, space, groups);
}

// --- dataset file ---------------------------------------------------------

void write_vectors(std::ostream& out, const VectorizedDataset& data)
{
    ordered_json header;
    header["format"] = "trollkit-vectors-v1";
    header["task"] = name(data.task);
    auto groups = ordered_json::array();
    for (auto g : data.groups)
        groups.push_back(group_name(g));
    header["groups"] = std::move(groups);
    header["space_size"] = data.width;
    header["dense_offset"] = data.dense_offset;
    header["dense_width"] = data.dense_width;
    header["classes"] = data.classes;
    header["pos_ngrams"] = "tag appended to each token";
    header["instances"] = data.vectors.size();
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < data.vectors.size(); ++i) {
        const auto& v = data.vectors[i];
        out << data.labels[i] << '\t';
        for (std::size_t k = 0; k < v.sparse.size(); ++k)
            out << (k ? " " : "") << v.sparse[k].first << ':' << fmt_double(v.sparse[k].second);
        out << '\t';
        for (std::size_t k = 0; k < v.dense.size(); ++k)
            out << (k ? " " : "") << fmt_double(v.dense[k]);
        out << '\n';
    }
}

VectorizedDataset read_vectors(std::istream& in)
{
    VectorizedDataset data;
    std::string line;
    if (!std::getline(in, line))
        throw InputError("empty vector file");
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "trollkit-vectors-v1")
        throw InputError("not a trollkit vector file");
    try {
        data.task = parse<Aspect>(header.at("task").get<std::string>());
        for (const auto& g : header.at("groups"))
            data.groups.insert(parse_group(g.get<std::string>()));
        data.width = header.at("space_size").get<std::size_t>();
        data.dense_offset = header.at("dense_offset").get<std::size_t>();
        data.dense_width = header.at("dense_width").get<std::size_t>();
        data.classes = header.at("classes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw InputError(std::string("bad vector header: ") + e.what());
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw InputError("vector line " + std::to_string(lineno) + " needs three tab-separated fields");
        data.labels.push_back(line.substr(0, tab1));
        FeatureVector v;
        std::istringstream sparse(line.substr(tab1 + 1, tab2 - tab1 - 1));
        std::string pair;
        while (sparse >> pair) {
            auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw InputError("vector line " + std::to_string(lineno) + ": bad pair '" + pair + "'");
            auto idx = std::stoul(pair.substr(0, colon));
            if (idx >= data.dense_offset)
                throw InputError("vector line " + std::to_string(lineno) + ": index beyond sparse block");
            v.sparse.emplace_back(static_cast<std::uint32_t>(idx), std::strtod(pair.c_str() + colon + 1, nullptr));
        }
        std::istringstream dense(line.substr(tab2 + 1));
        std::string x;
        while (dense >> x)
            v.dense.push_back(std::strtod(x.c_str(), nullptr));
        if (v.dense.size() != data.dense_width)
            throw InputError("vector line " + std::to_string(lineno) + ": dense block has wrong width");
        data.vectors.push_back(std::move(v));
    }
    return data;
}

} // namespace trollkit
