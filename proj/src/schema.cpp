#include "trollkit/schema.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "trollkit/corpus.hpp"

namespace trollkit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view display_name(Intention v)
{
    switch (v) {
    case Intention::Trolling: return "Trolling";
    case Intention::Playing: return "Mock Trolling or Playing";
    case Intention::NoTrolling: return "No Trolling";
    }
    return "";
}

std::string_view display_name(Interpretation v)
{
    return display_name(static_cast<Intention>(v));
}

std::vector<std::string> class_names(Aspect aspect)
{
    auto collect = [](const auto& names) { return std::vector<std::string>(names.begin(), names.end()); };
    switch (aspect) {
    case Aspect::I: return collect(EnumNames<Intention>::names);
    case Aspect::D: return collect(EnumNames<Disclosure>::names);
    case Aspect::R: return collect(EnumNames<Interpretation>::names);
    case Aspect::B: return collect(EnumNames<Strategy>::names);
    }
    return {};
}

std::string_view aspect_title(Aspect aspect)
{
    switch (aspect) {
    case Aspect::I: return "I: Intention";
    case Aspect::D: return "D: Intention Disclosure";
    case Aspect::R: return "R: Interpretation";
    case Aspect::B: return "B: Response Strategy";
    }
    return "";
}

bool is_attempt_aspect(Aspect aspect)
{
    return aspect == Aspect::I || aspect == Aspect::D;
}

bool attempt_pair_valid(Intention i, Disclosure d)
{
    if (i == Intention::NoTrolling)
        return d == Disclosure::None;
    return d == Disclosure::Hidden || d == Disclosure::Exposed;
}

bool response_pair_valid(Interpretation r, Strategy b)
{
    return !(r != Interpretation::NoTrolling && b == Strategy::Normal);
}

namespace {

std::vector<Violation> attempt_violations(Intention i, Disclosure d)
{
    std::vector<Violation> out;
    bool malicious_or_playful = i == Intention::Trolling || i == Intention::Playing;
    if (malicious_or_playful && d == Disclosure::None)
        out.push_back(Violation::A);
    if (i == Intention::NoTrolling && d != Disclosure::None)
        out.push_back(Violation::B);
    return out;
}

} // namespace

std::vector<Violation> validate_combination(Intention i, Disclosure d, std::span<const ResponsePair> pairs)
{
    auto out = attempt_violations(i, d);
    for (const auto& p : pairs) {
        if (!response_pair_valid(p.interpretation, p.strategy)) {
            out.push_back(Violation::C);
            break;
        }
    }
    return out;
}

std::vector<Violation> validate_combination(Intention i, Disclosure d, std::span<const ResponseLabel> responses)
{
    std::vector<ResponsePair> pairs;
    pairs.reserve(responses.size());
    for (const auto& r : responses)
        pairs.push_back({r.interpretation, r.strategy});
    return validate_combination(i, d, pairs);
}

std::uint64_t enumerate_valid(unsigned n_responses)
{
    // (valid attempt pairs) * (valid response pairs)^n
    std::uint64_t attempt_pairs = 0;
    for (auto i : all_values<Intention>())
        for (auto d : all_values<Disclosure>())
            if (validate_combination(i, d, std::span<const ResponsePair>{}).empty())
                ++attempt_pairs;

    std::uint64_t response_pairs = 0;
    for (auto r : all_values<Interpretation>())
        for (auto b : all_values<Strategy>())
            if (response_pair_valid(r, b))
                ++response_pairs;

    std::uint64_t total = attempt_pairs;
    for (unsigned k = 0; k < n_responses; ++k) {
        if (total > std::numeric_limits<std::uint64_t>::max() / response_pairs)
            throw InputError("valid-assignment count overflows for n=" + std::to_string(n_responses));
        total *= response_pairs;
    }
    return total;
}

const std::vector<ConstraintRule>& constraint_table()
{
    static const std::vector<ConstraintRule> rules = {
        {Violation::A, Aspect::I, {"Trolling", "Playing"}, Aspect::D, {"Exposed", "Hidden"},
         "a Trolling or Playing intention must be Exposed or Hidden"},
        {Violation::B, Aspect::I, {"NoTrolling"}, Aspect::D, {"None"}, "a NoTrolling intention has disclosure None"},
        {Violation::C, Aspect::R, {"Trolling", "Playing"}, Aspect::B,
         {"Engage", "Praise", "Troll", "Follow", "Frustrate", "Neutralize"},
         "a response read as Trolling or Playing cannot use the Normal strategy"},
    };
    return rules;
}

ordered_json schema_json()
{
    ordered_json j;
    auto aspects = ordered_json::array();
    for (auto a : kAspects) {
        ordered_json aj;
        aj["id"] = name(a);
        aj["title"] = aspect_title(a);
        aj["scope"] = is_attempt_aspect(a) ? "attempt" : "response";
        auto classes = ordered_json::array();
        for (const auto& c : class_names(a)) {
            std::string display = c;
            if (a == Aspect::I)
                display = display_name(parse<Intention>(c));
            else if (a == Aspect::R)
                display = display_name(parse<Interpretation>(c));
            classes.push_back(ordered_json{{"name", c}, {"display", display}});
        }
        aj["classes"] = std::move(classes);
        aspects.push_back(std::move(aj));
    }
    j["aspects"] = std::move(aspects);
    auto rules = ordered_json::array();
    for (const auto& r : constraint_table()) {
        ordered_json rj;
        rj["id"] = name(r.id);
        rj["if"] = ordered_json{{"aspect", name(r.if_aspect)}, {"in", r.if_in}};
        rj["then"] = ordered_json{{"aspect", name(r.then_aspect)}, {"in", r.then_allowed}};
        rj["text"] = r.text;
        rules.push_back(std::move(rj));
    }
    j["constraints"] = std::move(rules);
    j["discard"] = "a discarded annotation carries no attempt or response labels";
    return j;
}

std::string response_item_key(std::string_view snippet_id, std::string_view response_id)
{
    std::string key(snippet_id);
    key += '/';
    key += response_id;
    return key;
}

AnnotationCheck check_annotation(const SnippetAnnotation& a, const Snippet* snippet)
{
    AnnotationCheck check;
    if (a.snippet_id.empty()) {
        check.problem = "missing snippet_id";
        return check;
    }
    if (a.annotator_id.empty()) {
        check.problem = "missing annotator_id";
        return check;
    }
    if (a.discarded) {
        if (a.attempt || !a.responses.empty())
            check.problem = "discarded annotation carries labels";
        return check;
    }
    if (!a.attempt) {
        check.problem = "missing attempt labels";
        return check;
    }
    if (snippet) {
        if (snippet->snippet_id != a.snippet_id) {
            check.problem = "snippet id mismatch";
            return check;
        }
        bool same = a.responses.size() == snippet->responses.size();
        for (std::size_t k = 0; same && k < a.responses.size(); ++k)
            same = a.responses[k].response_id == snippet->responses[k].id;
        if (!same) {
            check.problem = "response ids do not match the snippet's responses";
            return check;
        }
    } else if (a.responses.empty()) {
        check.problem = "missing response labels";
        return check;
    }
    check.violations = validate_combination(a.attempt->intention, a.attempt->disclosure,
                                            std::span<const ResponseLabel>(a.responses));
    return check;
}

ordered_json to_json(const SnippetAnnotation& a)
{
    ordered_json j;
    j["snippet_id"] = a.snippet_id;
    j["annotator_id"] = a.annotator_id;
    j["discarded"] = a.discarded;
    if (a.attempt) {
        ordered_json att;
        att["intention"] = name(a.attempt->intention);
        att["disclosure"] = name(a.attempt->disclosure);
        j["attempt"] = std::move(att);
    } else {
        j["attempt"] = nullptr;
    }
    auto responses = ordered_json::array();
    for (const auto& r : a.responses) {
        ordered_json rj;
        rj["response_id"] = r.response_id;
        rj["interpretation"] = name(r.interpretation);
        rj["strategy"] = name(r.strategy);
        responses.push_back(std::move(rj));
    }
    j["responses"] = std::move(responses);
    j["submitted_at"] = a.submitted_at;
    j["phase"] = a.phase == Phase::Training ? "training" : "production";
    return j;
}

SnippetAnnotation annotation_from_json(const json& j)
{
    SnippetAnnotation a;
    try {
        a.snippet_id = j.at("snippet_id").get<std::string>();
        a.annotator_id = j.at("annotator_id").get<std::string>();
        a.discarded = j.value("discarded", false);
        if (auto it = j.find("attempt"); it != j.end() && !it->is_null()) {
            AttemptLabel att;
            att.intention = parse<Intention>(it->at("intention").get<std::string>());
            att.disclosure = parse<Disclosure>(it->at("disclosure").get<std::string>());
            a.attempt = att;
        }
        if (auto it = j.find("responses"); it != j.end()) {
            for (const auto& rj : *it) {
                ResponseLabel r;
                r.response_id = rj.at("response_id").get<std::string>();
                r.interpretation = parse<Interpretation>(rj.at("interpretation").get<std::string>());
                r.strategy = parse<Strategy>(rj.at("strategy").get<std::string>());
                a.responses.push_back(std::move(r));
            }
        }
        a.submitted_at = j.value("submitted_at", std::string());
        std::string phase = j.value("phase", std::string("production"));
        if (phase == "training")
            a.phase = Phase::Training;
        else if (phase == "production")
            a.phase = Phase::Production;
        else
            throw InputError("unknown phase '" + phase + "'");
    } catch (const json::exception& e) {
        throw InputError(std::string("bad annotation record: ") + e.what());
    }
    return a;
}

std::vector<SnippetAnnotation> read_annotations(std::istream& in)
{
    std::vector<SnippetAnnotation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("annotation line " + std::to_string(lineno) + " is not JSON");
        auto a = annotation_from_json(j);
        auto check = check_annotation(a);
        if (!check.ok()) {
            std::string why = check.problem;
            for (auto v : check.violations)
                why += (why.empty() ? "violates " : ", ") + std::string(name(v));
            throw InputError("annotation line " + std::to_string(lineno) + " rejected: " + why);
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::vector<SnippetAnnotation> read_annotations_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot open annotations " + path.string());
    return read_annotations(in);
}

void write_annotations(std::ostream& out, const std::vector<SnippetAnnotation>& annotations)
{
    for (const auto& a : annotations)
        out << to_json(a).dump() << '\n';
}

ordered_json to_json(const Adjudication& a)
{
    ordered_json j;
    j["item_id"] = a.item_id;
    j["aspect"] = name(a.aspect);
    j["label"] = a.label;
    j["resolver_id"] = a.resolver_id;
    j["submitted_at"] = a.submitted_at;
    return j;
}

Adjudication adjudication_from_json(const json& j)
{
    Adjudication a;
    try {
        a.item_id = j.at("item_id").get<std::string>();
        a.aspect = parse<Aspect>(j.at("aspect").get<std::string>());
        a.label = j.at("label").get<std::string>();
        a.resolver_id = j.value("resolver_id", std::string());
        a.submitted_at = j.value("submitted_at", std::string());
    } catch (const json::exception& e) {
        throw InputError(std::string("bad adjudication record: ") + e.what());
    }
    auto names = class_names(a.aspect);
    if (std::find(names.begin(), names.end(), a.label) == names.end())
        throw InputError("label '" + a.label + "' is not a class of aspect " + std::string(name(a.aspect)));
    return a;
}

GoldExport export_gold(const std::vector<SnippetAnnotation>& annotations,
                       const std::vector<Adjudication>& adjudications)
{
    std::map<std::pair<std::string, Aspect>, std::string> resolved;
    for (const auto& adj : adjudications)
        resolved[{adj.item_id, adj.aspect}] = adj.label;
    auto lookup = [&](const std::string& item, Aspect aspect) -> const std::string* {
        auto it = resolved.find({item, aspect});
        return it == resolved.end() ? nullptr : &it->second;
    };

    std::vector<std::string> order;
    std::map<std::string, std::vector<const SnippetAnnotation*>> by_snippet;
    for (const auto& a : annotations) {
        if (a.phase != Phase::Production)
            continue;
        auto& list = by_snippet[a.snippet_id];
        if (list.empty())
            order.push_back(a.snippet_id);
        list.push_back(&a);
    }

    GoldExport out;
    for (const auto& sid : order) {
        std::vector<const SnippetAnnotation*> labeled;
        for (const auto* a : by_snippet[sid])
            if (!a->discarded)
                labeled.push_back(a);
        if (labeled.empty())
            continue;
        std::sort(labeled.begin(), labeled.end(),
                  [](const auto* x, const auto* y) { return x->annotator_id < y->annotator_id; });

        SnippetAnnotation gold = *labeled.front();
        gold.annotator_id = "gold";
        bool open = false;

        if (labeled.size() >= 2) {
            const SnippetAnnotation& other = *labeled[1];
            auto settle = [&](auto& field, auto other_value, const std::string& item, Aspect aspect) {
                using E = std::decay_t<decltype(field)>;
                if (field == other_value)
                    return;
                if (const std::string* label = lookup(item, aspect))
                    field = parse<E>(*label);
                else
                    open = true;
            };
            settle(gold.attempt->intention, other.attempt->intention, sid, Aspect::I);
            settle(gold.attempt->disclosure, other.attempt->disclosure, sid, Aspect::D);
            for (auto& r : gold.responses) {
                auto it = std::find_if(other.responses.begin(), other.responses.end(),
                                       [&](const ResponseLabel& o) { return o.response_id == r.response_id; });
                if (it == other.responses.end())
                    continue;
                std::string key = response_item_key(sid, r.response_id);
                settle(r.interpretation, it->interpretation, key, Aspect::R);
                settle(r.strategy, it->strategy, key, Aspect::B);
            }
        }

        if (!open && !check_annotation(gold).ok())
            open = true;
        if (open)
            out.unresolved.push_back(sid);
        else
            out.gold.push_back(std::move(gold));
    }
    return out;
}

Distribution distribution(std::span<const SnippetAnnotation> annotations)
{
    std::array<std::vector<std::size_t>, 4> counts;
    for (auto aspect : kAspects)
        counts[static_cast<std::size_t>(aspect)].assign(class_names(aspect).size(), 0);

    Distribution d;
    for (const auto& a : annotations) {
        if (a.discarded || !a.attempt || a.phase != Phase::Production)
            continue;
        ++d.attempts;
        ++counts[0][static_cast<std::size_t>(a.attempt->intention)];
        ++counts[1][static_cast<std::size_t>(a.attempt->disclosure)];
        for (const auto& r : a.responses) {
            ++d.responses;
            ++counts[2][static_cast<std::size_t>(r.interpretation)];
            ++counts[3][static_cast<std::size_t>(r.strategy)];
        }
    }

    for (auto aspect : kAspects) {
        auto idx = static_cast<std::size_t>(aspect);
        auto names = class_names(aspect);
        std::size_t total = is_attempt_aspect(aspect) ? d.attempts : d.responses;
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (counts[idx][c] == 0)
                continue;
            d.per_aspect[idx].push_back(
                {names[c], counts[idx][c], 100.0 * static_cast<double>(counts[idx][c]) / static_cast<double>(total)});
        }
    }
    return d;
}

ordered_json to_json(const Distribution& d)
{
    ordered_json j;
    j["attempts"] = d.attempts;
    j["responses"] = d.responses;
    for (auto aspect : kAspects) {
        auto rows = ordered_json::array();
        for (const auto& c : d[aspect]) {
            ordered_json row;
            row["class"] = c.label;
            row["count"] = c.count;
            row["percent"] = c.percent;
            rows.push_back(std::move(row));
        }
        j[std::string(name(aspect))] = std::move(rows);
    }
    return j;
}

} // namespace trollkit
