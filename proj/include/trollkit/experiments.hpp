#pragma once

// 5-fold cross-validation over the majority / single-group / all-features
// matrix, pooled metrics, the results table and the error dump.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "trollkit/corpus.hpp"
#include "trollkit/features.hpp"
#include "trollkit/model.hpp"
#include "trollkit/schema.hpp"

namespace trollkit {

inline constexpr std::size_t kFolds = 5;
inline constexpr std::uint64_t kDefaultSeed = 13;

struct FoldPlan {
    std::uint64_t seed = kDefaultSeed;
    std::map<std::string, std::size_t> assignment; // snippet_id -> fold
    std::vector<std::size_t> fold_of;              // parallel to the snippet list
};

// Seeded Fisher-Yates shuffle, then round-robin. Throws InputError with
// fewer than five snippets.
FoldPlan make_folds(std::span<const Snippet> snippets, std::uint64_t seed = kDefaultSeed);

inline std::size_t dev_fold(std::size_t test_fold) { return (test_fold + 1) % kFolds; }

// Snippets paired with one gold annotation each.
struct LabeledCorpus {
    std::vector<Snippet> snippets;
    std::vector<SnippetAnnotation> labels; // parallel to snippets, never discarded

    // Keeps snippets that have a gold annotation; the annotation's response
    // ids must match the snippet.
    static LabeledCorpus join(const std::vector<Snippet>& snippets, const std::vector<SnippetAnnotation>& gold);
};

// I/D: one instance per snippet; R/B: one per response.
std::vector<Instance> task_instances(const LabeledCorpus& corpus, Aspect task);
std::string instance_item_id(const LabeledCorpus& corpus, const Instance& inst);

struct CellSpec {
    std::string name; // "mjr", a group name, or "all"
    bool majority = false;
    GroupSet groups;
};

// "majority", "single" and "all" expand against the given group list;
// single cells follow the report column order.
std::vector<CellSpec> expand_cells(std::string_view cells, const GroupSet& single_groups);

struct CellResult {
    Aspect task = Aspect::I;
    std::string cell;
    GroupSet groups;
    std::vector<Instance> instances;
    std::vector<std::size_t> fold_of;    // per instance
    std::vector<std::string> predicted;  // per instance, pooled over test folds
    std::array<double, kFolds> lambda{}; // chosen per fold, 0 for majority
    std::set<std::string> absent_classes; // missing from at least one training partition
    std::vector<std::optional<LinearModel>> models; // per fold; empty for majority cells
    std::vector<FeatureSpace> spaces;               // per fold
};

struct ExperimentOptions {
    std::uint64_t seed = kDefaultSeed;
    std::vector<double> lambda_grid = kDefaultLambdaGrid;
    TrainOptions train;
    std::size_t top_k = 5;
};

// Expects featurizer.prepare() to have run on corpus.snippets when called concurrently.
CellResult run_cell(Aspect task, const CellSpec& cell, const FoldPlan& folds, const LabeledCorpus& corpus,
                    const Featurizer& featurizer, const ExperimentOptions& options = {});

struct ClassMetrics {
    std::string label;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t support = 0; // gold count
};

struct Metrics {
    std::vector<ClassMetrics> per_class; // in the given class order
    std::size_t n = 0, correct = 0;
    double accuracy = 0.0;
    double weighted_f1 = 0.0; // weights = gold frequency
};

// Zero denominators give 0. Throws InputError on a length mismatch.
Metrics metrics(std::span<const std::string> gold, std::span<const std::string> predicted,
                const std::vector<std::string>& classes);

struct TaskTally {
    std::size_t correct = 0;
    std::size_t total = 0;
};

// Pooled over the four tasks; throws InputError if a task is missing.
double total_accuracy(const std::map<Aspect, TaskTally>& tallies);

struct CellReport {
    std::string cell;
    std::map<Aspect, Metrics> per_task;
    std::map<Aspect, std::set<std::string>> absent_classes;
    std::map<Aspect, std::array<double, kFolds>> lambda;
    double total_accuracy = 0.0;
};

struct EvalReport {
    std::uint64_t seed = kDefaultSeed;
    std::vector<double> lambda_grid;
    std::map<Aspect, std::vector<ClassCount>> size; // gold class shares per task
    std::vector<CellReport> cells;                  // in run order
};

EvalReport build_report(const LabeledCorpus& corpus, const std::vector<CellResult>& results,
                        const ExperimentOptions& options);

void write_table_tsv(std::ostream& out, const EvalReport& report);
void write_table_txt(std::ostream& out, const EvalReport& report);

struct ErrorRow {
    std::string snippet_id;
    std::string item_id;
    Aspect task = Aspect::I;
    std::string cell;
    std::string gold;
    std::string predicted;
    std::string text;
    std::vector<std::pair<std::string, double>> top_features; // column name, weight x value
};

// Misclassified instances of a trained cell with the k active features that
// push hardest toward the predicted class.
std::vector<ErrorRow> dump_errors(const CellResult& result, const LabeledCorpus& corpus,
                                  const Featurizer& featurizer, std::size_t k);
void write_errors(std::ostream& out, const std::vector<ErrorRow>& rows);

struct ExperimentRun {
    EvalReport report;
    std::vector<CellResult> results;
    std::vector<ErrorRow> errors;
};

// Runs every (task, cell) job, cells in parallel. Errors come from the "all"
// cell, or the first trained cell when "all" is not requested.
ExperimentRun run_experiments(const LabeledCorpus& corpus, const std::vector<CellSpec>& cells,
                              Featurizer& featurizer, const ExperimentOptions& options = {});

// Writes table.tsv, table.txt and errors.jsonl into dir.
void write_report_dir(const std::filesystem::path& dir, const ExperimentRun& run);

} // namespace trollkit
