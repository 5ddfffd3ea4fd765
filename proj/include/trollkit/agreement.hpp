#pragma once

// Inter-annotator agreement and discrepancy listing for a pair of annotators.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trollkit/schema.hpp"

namespace trollkit {

class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes) : k_(classes), cells_(classes * classes, 0) {}
    ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major);

    std::size_t classes() const { return k_; }
    std::uint64_t& at(std::size_t row, std::size_t col) { return cells_[row * k_ + col]; }
    std::uint64_t at(std::size_t row, std::size_t col) const { return cells_[row * k_ + col]; }
    void add(std::size_t row, std::size_t col, std::uint64_t count = 1) { at(row, col) += count; }
    std::uint64_t total() const;
    std::uint64_t trace() const;

private:
    std::size_t k_;
    std::vector<std::uint64_t> cells_;
};

struct KappaTerms {
    std::uint64_t n = 0;
    double observed = 0.0; // p_o
    double chance = 0.0;   // p_e
    double kappa = 0.0;
};

// Unweighted Cohen's kappa. Throws UndefinedAgreementError when n = 0.
// Returns exactly 1 when chance agreement is 1 (both raters constant on one class).
KappaTerms kappa_terms(const ConfusionMatrix& m);
double cohen_kappa(const ConfusionMatrix& m);

// Linear-weighted kappa with disagreement weight |i-j|/(k-1); equals the
// unweighted statistic for k = 2.
double linear_weighted_kappa(const ConfusionMatrix& m);

// Labels of one aspect as class indices, paired over commonly annotated items.
struct LabelPairSet {
    Aspect aspect = Aspect::I;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

ConfusionMatrix confusion(const LabelPairSet& set);

struct AnnotatorPair {
    std::string a;
    std::string b;
};

// Pairs I,D per snippet and R,B per (snippet, response). Snippets discarded by
// either annotator, and training-phase annotations, are left out.
std::array<LabelPairSet, 4> pair_labels(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who);

struct Discrepancy {
    std::string item_id;
    std::string aspect; // "I", "D", "R", "B" or "discard"
    std::string label_a;
    std::string label_b;
};

struct DiscrepancyList {
    std::vector<Discrepancy> items;
    bool no_overlap = false;
};

DiscrepancyList discrepancies(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who);

struct AgreementRow {
    Aspect aspect = Aspect::I;
    KappaTerms terms;
    bool defined = false; // false when the aspect has no paired items
};

struct AgreementReport {
    std::vector<AgreementRow> rows; // one per aspect, I D R B
    bool no_overlap = false;
};

AgreementReport agreement_report(std::span<const SnippetAnnotation> annotations, const AnnotatorPair& who,
                                 bool linear_weighted = false);

// The two annotators sharing the most snippets (ties: lexicographic); nullopt with fewer than two.
std::optional<AnnotatorPair> busiest_pair(std::span<const SnippetAnnotation> annotations);

} // namespace trollkit
