#include "trollkit/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace trollkit {

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major)
    : k_(classes), cells_(std::move(row_major))
{
    if (cells_.size() != k_ * k_)
        throw InputError("confusion matrix needs k*k cells");
}

std::uint64_t ConfusionMatrix::total() const
{
    std::uint64_t n = 0;
    for (auto c : cells_)
        n += c;
    return n;
}

std::uint64_t ConfusionMatrix::trace() const
{
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < k_; ++i)
        t += at(i, i);
    return t;
}

KappaTerms kappa_terms(const ConfusionMatrix& m)
{
    KappaTerms t;
    t.n = m.total();
    if (t.n == 0)
        throw UndefinedAgreementError("kappa over zero paired items");
    const double n = static_cast<double>(t.n);
    const std::size_t k = m.classes();

    std::uint64_t chance_num = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::uint64_t row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += m.at(c, j);
            col += m.at(j, c);
        }
        chance_num += row * col;
    }
    t.observed = static_cast<double>(m.trace()) / n;
    t.chance = static_cast<double>(chance_num) / (n * n);
    // Integer test keeps the degenerate case exact.
    if (chance_num == t.n * t.n)
        t.kappa = 1.0;
    else
        t.kappa = (t.observed - t.chance) / (1.0 - t.chance);
    return t;
}

double cohen_kappa(const ConfusionMatrix& m)
{
    return kappa_terms(m).kappa;
}

double linear_weighted_kappa(const ConfusionMatrix& m)
{
    const std::uint64_t total = m.total();
    if (total == 0)
        throw UndefinedAgreementError("kappa over zero paired items");
    const std::size_t k = m.classes();
    if (k < 2)
        return 1.0;
    const double n = static_cast<double>(total);
    std::vector<double> rows(k, 0.0), cols(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            rows[i] += static_cast<double>(m.at(i, j));
            cols[j] += static_cast<double>(m.at(i, j));
        }
    double observed = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double w = std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(k - 1);
            observed += w * static_cast<double>(m.at(i, j)) / n;
            expected += w * rows[i] * cols[j] / (n * n);
        }
    if (expected == 0.0)
        return 1.0;
    return 1.0 - observed / expected;
}

ConfusionMatrix confusion(const LabelPairSet& set)
{
    ConfusionMatrix m(class_names(set.aspect).size());
    for (auto [a, b] : set.pairs)
        m.add(a, b);
    return m;
}

namespace {

using Latest = std::map<std::string, const SnippetAnnotation*>;

// snippet id -> that annotator's most recent production annotation
Latest latest_by_snippet(std::span<const SnippetAnnotation> annotations, const std::string& annotator)
{
    Latest out;
    for (const auto& a : annotations)
        if (a.annotator_id == annotator && a.phase == Phase::Production)
            out[a.snippet_id] = &a;
    return out;
}

template <typename Fn>
bool for_each_overlap(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who, Fn&& fn)
{
    Latest la = latest_by_snippet(annotations, who.a);
    Latest lb = latest_by_snippet(annotations, who.b);
    bool any = false;
    for (const auto& [sid, a] : la) {
        auto it = lb.find(sid);
        if (it == lb.end())
            continue;
        any = true;
        fn(sid, *a, *it->second);
    }
    return any;
}

const ResponseLabel* find_response(const SnippetAnnotation& a, const std::string& id)
{
    for (const auto& r : a.responses)
        if (r.response_id == id)
            return &r;
    return nullptr;
}

} // namespace

std::array<LabelPairSet, 4> pair_labels(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who)
{
    std::array<LabelPairSet, 4> sets;
    for (auto aspect : kAspects)
        sets[static_cast<std::size_t>(aspect)].aspect = aspect;
    for_each_overlap(annotations, who, [&](const std::string&, const SnippetAnnotation& a, const SnippetAnnotation& b) {
        if (a.discarded || b.discarded)
            return;
        sets[0].pairs.emplace_back(static_cast<std::size_t>(a.attempt->intention),
                                   static_cast<std::size_t>(b.attempt->intention));
        sets[1].pairs.emplace_back(static_cast<std::size_t>(a.attempt->disclosure),
                                   static_cast<std::size_t>(b.attempt->disclosure));
        for (const auto& ra : a.responses) {
            const ResponseLabel* rb = find_response(b, ra.response_id);
            if (!rb)
                continue;
            sets[2].pairs.emplace_back(static_cast<std::size_t>(ra.interpretation),
                                       static_cast<std::size_t>(rb->interpretation));
            sets[3].pairs.emplace_back(static_cast<std::size_t>(ra.strategy), static_cast<std::size_t>(rb->strategy));
        }
    });
    return sets;
}

DiscrepancyList discrepancies(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who)
{
    DiscrepancyList out;
    auto note = [&](std::string item, Aspect aspect, std::string_view x, std::string_view y) {
        if (x != y)
            out.items.push_back({std::move(item), std::string(name(aspect)), std::string(x), std::string(y)});
    };
    bool any = for_each_overlap(annotations, who, [&](const std::string& sid, const SnippetAnnotation& a,
                                                      const SnippetAnnotation& b) {
        if (a.discarded != b.discarded) {
            out.items.push_back({sid, "discard", a.discarded ? "discarded" : "labeled",
                                 b.discarded ? "discarded" : "labeled"});
            return;
        }
        if (a.discarded)
            return;
        note(sid, Aspect::I, name(a.attempt->intention), name(b.attempt->intention));
        note(sid, Aspect::D, name(a.attempt->disclosure), name(b.attempt->disclosure));
        for (const auto& ra : a.responses) {
            const ResponseLabel* rb = find_response(b, ra.response_id);
            if (!rb)
                continue;
            std::string key = response_item_key(sid, ra.response_id);
            note(key, Aspect::R, name(ra.interpretation), name(rb->interpretation));
            note(key, Aspect::B, name(ra.strategy), name(rb->strategy));
        }
    });
    out.no_overlap = !any;
    return out;
}

AgreementReport agreement_report(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who,
                                 bool linear_weighted)
{
    AgreementReport report;
    auto sets = pair_labels(annotations, who);
    bool any = false;
    for (const auto& set : sets) {
        AgreementRow row;
        row.aspect = set.aspect;
        if (!set.pairs.empty()) {
            auto m = confusion(set);
            row.terms = kappa_terms(m);
            if (linear_weighted)
                row.terms.kappa = linear_weighted_kappa(m);
            row.defined = true;
            any = true;
        }
        report.rows.push_back(row);
    }
    report.no_overlap = !any;
    return report;
}

std::optional<AnnotatorPair> busiest_pair(std::span<const SnippetAnnotation> annotations)
{
    std::map<std::string, std::set<std::string>> snippets_of;
    for (const auto& a : annotations)
        if (a.phase == Phase::Production)
            snippets_of[a.annotator_id].insert(a.snippet_id);
    if (snippets_of.size() < 2)
        return std::nullopt;

    std::optional<AnnotatorPair> best;
    std::size_t best_overlap = 0;
    for (auto i = snippets_of.begin(); i != snippets_of.end(); ++i) {
        for (auto j = std::next(i); j != snippets_of.end(); ++j) {
            std::size_t overlap = 0;
            for (const auto& s : i->second)
                overlap += j->second.count(s);
            if (!best || overlap > best_overlap) {
                best = AnnotatorPair{i->first, j->first};
                best_overlap = overlap;
            }
        }
    }
    return best;
}

} // namespace trollkit
