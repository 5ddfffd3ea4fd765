#include "trollkit/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trollkit/errors.hpp"
#include "trollkit/parallel.hpp"

namespace trollkit {

using nlohmann::ordered_json;

// --- folds -------------------------------------------------------------------

FoldPlan make_folds(std::span<const Snippet> snippets, std::uint64_t seed)
{
    if (snippets.size() < kFolds)
        throw InputError("need at least " + std::to_string(kFolds) + " snippets for cross-validation, got " +
                         std::to_string(snippets.size()));
    std::vector<std::size_t> order(snippets.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 engine(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        auto j = static_cast<std::size_t>(engine() % (i + 1));
        std::swap(order[i], order[j]);
    }
    FoldPlan plan;
    plan.seed = seed;
    plan.fold_of.assign(snippets.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t fold = pos % kFolds;
        plan.fold_of[order[pos]] = fold;
        plan.assignment[snippets[order[pos]].snippet_id] = fold;
    }
    return plan;
}

// --- corpus ------------------------------------------------------------------

LabeledCorpus LabeledCorpus::join(const std::vector<Snippet>& snippets, const std::vector<SnippetAnnotation>& gold)
{
    std::map<std::string, const SnippetAnnotation*> by_id;
    for (const auto& a : gold) {
        if (a.discarded || a.phase != Phase::Production)
            continue;
        if (!by_id.emplace(a.snippet_id, &a).second)
            throw InputError("more than one gold annotation for snippet " + a.snippet_id);
    }
    LabeledCorpus out;
    for (const auto& s : snippets) {
        auto it = by_id.find(s.snippet_id);
        if (it == by_id.end())
            continue;
        auto check = check_annotation(*it->second, &s);
        if (!check.ok())
            throw InputError("gold annotation for snippet " + s.snippet_id + " does not fit the snippet: " +
                             (check.problem.empty() ? "constraint violation" : check.problem));
        out.snippets.push_back(s);
        out.labels.push_back(*it->second);
    }
    return out;
}

namespace {

std::string label_of(const SnippetAnnotation& a, Aspect task, std::optional<std::size_t> response)
{
    switch (task) {
    case Aspect::I: return std::string(name(a.attempt->intention));
    case Aspect::D: return std::string(name(a.attempt->disclosure));
    case Aspect::R: return std::string(name(a.responses.at(*response).interpretation));
    case Aspect::B: return std::string(name(a.responses.at(*response).strategy));
    }
    return {};
}

} // namespace

std::vector<Instance> task_instances(const LabeledCorpus& corpus, Aspect task)
{
    std::vector<Instance> out;
    for (std::size_t s = 0; s < corpus.snippets.size(); ++s) {
        const auto& a = corpus.labels[s];
        if (is_attempt_aspect(task)) {
            out.push_back({s, task, std::nullopt, label_of(a, task, std::nullopt)});
        } else {
            for (std::size_t r = 0; r < corpus.snippets[s].responses.size(); ++r)
                out.push_back({s, task, r, label_of(a, task, r)});
        }
    }
    return out;
}

std::string instance_item_id(const LabeledCorpus& corpus, const Instance& inst)
{
    const auto& s = corpus.snippets[inst.snippet];
    if (!inst.response)
        return s.snippet_id;
    return response_item_key(s.snippet_id, s.responses[*inst.response].id);
}

// --- cells -------------------------------------------------------------------

std::vector<CellSpec> expand_cells(std::string_view cells, const GroupSet& single_groups)
{
    std::vector<CellSpec> out;
    std::set<std::string> seen;
    auto push = [&](CellSpec c) {
        if (seen.insert(c.name).second)
            out.push_back(std::move(c));
    };
    std::size_t start = 0;
    while (start <= cells.size()) {
        auto comma = cells.find(',', start);
        auto item = cells.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        if (item == "majority" || item == "mjr") {
            push({"mjr", true, {}});
        } else if (item == "single") {
            for (auto g : kReportGroupOrder)
                if (single_groups.count(g))
                    push({std::string(group_name(g)), false, {g}});
        } else if (item == "all") {
            push({"all", false, GroupSet(kAllGroups.begin(), kAllGroups.end())});
        } else if (!item.empty()) {
            auto g = parse_group(item);
            push({std::string(group_name(g)), false, {g}});
        }
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    if (out.empty())
        throw InputError("no experiment cells selected");
    return out;
}

CellResult run_cell(Aspect task, const CellSpec& cell, const FoldPlan& folds, const LabeledCorpus& corpus,
                    const Featurizer& featurizer, const ExperimentOptions& options)
{
    if (folds.fold_of.size() != corpus.snippets.size())
        throw InputError("fold plan does not cover the corpus");
    CellResult res;
    res.task = task;
    res.cell = cell.name;
    res.groups = cell.groups;
    res.instances = task_instances(corpus, task);
    const std::size_t n = res.instances.size();
    res.fold_of.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        res.fold_of[i] = folds.fold_of[res.instances[i].snippet];
    res.predicted.assign(n, std::string());
    res.models.resize(kFolds);
    res.spaces.resize(kFolds);

    const auto all_classes = class_names(task);
    for (std::size_t f = 0; f < kFolds; ++f) {
        std::vector<Instance> train, dev;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < n; ++i) {
            if (res.fold_of[i] == f)
                test.push_back(i);
            else if (res.fold_of[i] == dev_fold(f))
                dev.push_back(res.instances[i]);
            else
                train.push_back(res.instances[i]);
        }
        if (train.empty())
            throw InputError("fold " + std::to_string(f) + " has an empty training partition");
        std::vector<std::string> train_labels;
        for (const auto& t : train)
            train_labels.push_back(t.label);
        std::vector<std::string> present;
        for (const auto& c : all_classes) {
            if (std::find(train_labels.begin(), train_labels.end(), c) != train_labels.end())
                present.push_back(c);
            else
                res.absent_classes.insert(c);
        }

        if (cell.majority) {
            auto m = MajorityModel::fit(train_labels);
            for (auto i : test)
                res.predicted[i] = m.label;
            continue;
        }

        FeatureSpace space = featurizer.build_space(corpus.snippets, train, cell.groups);
        const FeatureSpace& frozen = space;
        auto vectorize = [&](const Instance& inst) {
            return featurizer.featurize(corpus.snippets[inst.snippet], task, inst.response, frozen, cell.groups);
        };
        if (present.size() < 2) {
            for (auto i : test)
                res.predicted[i] = present.front();
            res.spaces[f] = std::move(space);
            continue;
        }
        std::vector<FeatureVector> xtrain, xdev;
        std::vector<std::string> ydev;
        for (const auto& t : train)
            xtrain.push_back(vectorize(t));
        for (const auto& d : dev) {
            xdev.push_back(vectorize(d));
            ydev.push_back(d.label);
        }
        Dataset data =
            Dataset::from_labels(xtrain, train_labels, present, frozen.sparse_size(), frozen.dense_width());
        auto tuned = tune_lambda(data, xdev, ydev, options.lambda_grid, options.train);
        for (auto i : test)
            res.predicted[i] = predict_label(tuned.model, vectorize(res.instances[i]));
        res.lambda[f] = tuned.lambda;
        res.models[f] = std::move(tuned.model);
        res.spaces[f] = std::move(space);
    }
    return res;
}

// --- metrics -----------------------------------------------------------------

Metrics metrics(std::span<const std::string> gold, std::span<const std::string> predicted,
                const std::vector<std::string>& classes)
{
    if (gold.size() != predicted.size())
        throw InputError("gold and predicted sequences differ in length");
    Metrics m;
    m.n = gold.size();
    for (std::size_t i = 0; i < gold.size(); ++i)
        m.correct += gold[i] == predicted[i];
    m.accuracy = m.n ? static_cast<double>(m.correct) / static_cast<double>(m.n) : 0.0;
    auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
    double weighted = 0.0;
    for (const auto& c : classes) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool g = gold[i] == c, p = predicted[i] == c;
            tp += g && p;
            fp += !g && p;
            fn += g && !p;
        }
        ClassMetrics cm;
        cm.label = c;
        cm.support = tp + fn;
        cm.precision = ratio(tp, tp + fp);
        cm.recall = ratio(tp, tp + fn);
        const double denom = cm.precision + cm.recall;
        cm.f1 = denom > 0 ? 2 * cm.precision * cm.recall / denom : 0.0;
        weighted += cm.f1 * static_cast<double>(cm.support);
        m.per_class.push_back(std::move(cm));
    }
    m.weighted_f1 = m.n ? weighted / static_cast<double>(m.n) : 0.0;
    return m;
}

double total_accuracy(const std::map<Aspect, TaskTally>& tallies)
{
    std::size_t correct = 0, total = 0;
    for (auto a : kAspects) {
        auto it = tallies.find(a);
        if (it == tallies.end())
            throw InputError("total accuracy needs task " + std::string(name(a)));
        correct += it->second.correct;
        total += it->second.total;
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

// --- report ------------------------------------------------------------------

EvalReport build_report(const LabeledCorpus& corpus, const std::vector<CellResult>& results,
                        const ExperimentOptions& options)
{
    EvalReport report;
    report.seed = options.seed;
    report.lambda_grid = options.lambda_grid;
    for (auto task : kAspects) {
        auto inst = task_instances(corpus, task);
        std::vector<ClassCount> share;
        for (const auto& c : class_names(task)) {
            ClassCount cc{c, 0, 0.0};
            for (const auto& i : inst)
                cc.count += i.label == c;
            cc.percent = inst.empty() ? 0.0 : 100.0 * static_cast<double>(cc.count) / static_cast<double>(inst.size());
            share.push_back(cc);
        }
        report.size[task] = std::move(share);
    }

    std::map<std::string, std::size_t> slot;
    for (const auto& r : results) {
        auto [it, fresh] = slot.emplace(r.cell, report.cells.size());
        if (fresh)
            report.cells.push_back(CellReport{r.cell, {}, {}, {}, 0.0});
        auto& cell = report.cells[it->second];
        std::vector<std::string> gold;
        for (const auto& i : r.instances)
            gold.push_back(i.label);
        cell.per_task[r.task] = metrics(gold, r.predicted, class_names(r.task));
        cell.absent_classes[r.task] = r.absent_classes;
        cell.lambda[r.task] = r.lambda;
    }
    for (auto& cell : report.cells) {
        if (cell.per_task.size() != kAspects.size())
            continue;
        std::map<Aspect, TaskTally> tallies;
        for (const auto& [task, m] : cell.per_task)
            tallies[task] = {m.correct, m.n};
        cell.total_accuracy = total_accuracy(tallies);
    }
    return report;
}

namespace {

std::string pct(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v + 0.0);
    return buf;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<std::string> header_notes(const EvalReport& report)
{
    std::vector<std::string> notes;
    notes.push_back("evaluation: predictions pooled over the 5 test folds, one prediction per instance, metrics "
                    "computed once");
    notes.push_back("folds: seed " + std::to_string(report.seed) +
                    ", seeded shuffle then round-robin over snippets; test fold i, dev fold (i+1) mod 5, train "
                    "on the remaining three");
    std::string grid;
    for (double l : report.lambda_grid)
        grid += (grid.empty() ? "" : ",") + num(l);
    notes.push_back("optimizer (trollkit defaults): multinomial logistic regression, full-batch gradient descent "
                    "with Armijo backtracking c=1e-4 shrink=0.5, W=b=0 start, stop at gradient inf-norm <= 1e-6 "
                    "or 500 iterations");
    notes.push_back("lambda grid {" + grid + "} tuned on dev accuracy, ties to the larger lambda");
    notes.push_back("n-gram POS variants append the tag to each token");
    notes.push_back("numbers are percentages; single-group and mjr columns are F1, all shows R, P, F1");
    for (const auto& cell : report.cells) {
        for (const auto& [task, classes] : cell.absent_classes) {
            if (classes.empty())
                continue;
            std::string list;
            for (const auto& c : classes)
                list += (list.empty() ? "" : ",") + c;
            notes.push_back("absent from a training partition: cell " + cell.cell + ", task " +
                            std::string(name(task)) + ": " + list);
        }
    }
    return notes;
}

using Row = std::vector<std::string>;

std::vector<Row> table_rows(const EvalReport& report)
{
    std::vector<Row> rows;
    Row head{"Aspect/Class"};
    for (const auto& c : report.cells) {
        if (c.cell == "all") {
            head.push_back("all:R");
            head.push_back("all:P");
            head.push_back("all:F1");
        } else {
            head.push_back(c.cell);
        }
    }
    head.push_back("Size");
    rows.push_back(head);

    for (auto task : kAspects) {
        rows.push_back(Row{std::string(aspect_title(task))});
        const auto classes = class_names(task);
        for (std::size_t k = 0; k < classes.size(); ++k) {
            Row r{classes[k]};
            for (const auto& c : report.cells) {
                auto it = c.per_task.find(task);
                const ClassMetrics* m = it == c.per_task.end() ? nullptr : &it->second.per_class[k];
                if (c.cell == "all") {
                    r.push_back(m ? pct(m->recall) : "-");
                    r.push_back(m ? pct(m->precision) : "-");
                }
                r.push_back(m ? pct(m->f1) : "-");
            }
            char size[32];
            std::snprintf(size, sizeof size, "%.1f", report.size.at(task)[k].percent);
            r.push_back(size);
            rows.push_back(std::move(r));
        }
        Row acc{"Accuracy"};
        for (const auto& c : report.cells) {
            auto it = c.per_task.find(task);
            if (c.cell == "all") {
                acc.push_back("-");
                acc.push_back("-");
            }
            acc.push_back(it == c.per_task.end() ? "-" : pct(it->second.accuracy));
        }
        acc.push_back("-");
        rows.push_back(std::move(acc));
    }
    rows.push_back(Row{"All Tasks Combined"});
    Row total{"Total Accuracy"};
    for (const auto& c : report.cells) {
        if (c.cell == "all") {
            total.push_back("-");
            total.push_back("-");
        }
        total.push_back(c.per_task.size() == kAspects.size() ? pct(c.total_accuracy) : "-");
    }
    total.push_back("-");
    rows.push_back(std::move(total));
    return rows;
}

} // namespace

void write_table_tsv(std::ostream& out, const EvalReport& report)
{
    for (const auto& note : header_notes(report))
        out << "# " << note << '\n';
    for (const auto& row : table_rows(report)) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "\t" : "") << row[i];
        out << '\n';
    }
}

void write_table_txt(std::ostream& out, const EvalReport& report)
{
    auto rows = table_rows(report);
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        if (row.size() == 1)
            continue;
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    }
    std::size_t line = 0;
    for (auto w : width)
        line += w + 2;
    const std::string rule(line, '-');
    for (const auto& note : header_notes(report))
        out << note << '\n';
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1) {
            out << rule << '\n' << row[0] << '\n' << rule << '\n';
            continue;
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0)
                out << row[i] << std::string(width[i] - row[i].size() + 2, ' ');
            else
                out << std::string(width[i] - row[i].size(), ' ') << row[i] << "  ";
        }
        out << '\n';
    }
    out << rule << '\n';
}

// --- errors ------------------------------------------------------------------

std::vector<ErrorRow> dump_errors(const CellResult& result, const LabeledCorpus& corpus,
                                  const Featurizer& featurizer, std::size_t k)
{
    std::vector<ErrorRow> rows;
    for (std::size_t i = 0; i < result.instances.size(); ++i) {
        const auto& inst = result.instances[i];
        if (result.predicted[i] == inst.label)
            continue;
        const auto fold = result.fold_of[i];
        const auto& snippet = corpus.snippets[inst.snippet];
        ErrorRow row;
        row.snippet_id = snippet.snippet_id;
        row.item_id = instance_item_id(corpus, inst);
        row.task = result.task;
        row.cell = result.cell;
        row.gold = inst.label;
        row.predicted = result.predicted[i];
        row.text = source_comment(snippet, inst.task, inst.response).body;
        if (fold < result.models.size() && result.models[fold]) {
            const LinearModel& m = *result.models[fold];
            const FeatureSpace& space = result.spaces[fold];
            auto x = featurizer.featurize(snippet, inst.task, inst.response, space, result.groups);
            const auto pk = static_cast<std::size_t>(
                std::find(m.classes.begin(), m.classes.end(), row.predicted) - m.classes.begin());
            std::vector<std::pair<std::size_t, double>> contrib;
            for (const auto& [j, v] : x.sparse)
                contrib.emplace_back(j, m.weight(pk, j) * v);
            for (std::size_t t = 0; t < x.dense.size(); ++t)
                if (x.dense[t] != 0.0)
                    contrib.emplace_back(m.sparse_width + t, m.weight(pk, m.sparse_width + t) * x.dense[t]);
            std::stable_sort(contrib.begin(), contrib.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
            for (std::size_t c = 0; c < contrib.size() && c < k; ++c)
                row.top_features.emplace_back(space.column_name(contrib[c].first), contrib[c].second);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_errors(std::ostream& out, const std::vector<ErrorRow>& rows)
{
    for (const auto& r : rows) {
        ordered_json j;
        j["snippet_id"] = r.snippet_id;
        j["item_id"] = r.item_id;
        j["task"] = name(r.task);
        j["cell"] = r.cell;
        j["gold"] = r.gold;
        j["predicted"] = r.predicted;
        j["text"] = r.text;
        auto feats = ordered_json::array();
        for (const auto& [feature, weight] : r.top_features)
            feats.push_back(ordered_json{{"feature", feature}, {"contribution", weight}});
        j["top_features"] = std::move(feats);
        out << j.dump() << '\n';
    }
}

// --- driver ------------------------------------------------------------------

ExperimentRun run_experiments(const LabeledCorpus& corpus, const std::vector<CellSpec>& cells,
                              Featurizer& featurizer, const ExperimentOptions& options)
{
    const FoldPlan folds = make_folds(corpus.snippets, options.seed);
    featurizer.prepare(corpus.snippets);
    for (const auto& c : cells)
        if (!c.majority)
            featurizer.dense_width(c.groups);

    struct Job {
        Aspect task;
        const CellSpec* cell;
    };
    std::vector<Job> jobs;
    for (const auto& c : cells)
        for (auto task : kAspects)
            jobs.push_back({task, &c});

    std::vector<CellResult> results(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    const Featurizer& shared = featurizer;
    const auto count = static_cast<std::ptrdiff_t>(jobs.size());
    TROLLKIT_OMP_PARALLEL_FOR_DYNAMIC
    for (std::ptrdiff_t jj = 0; jj < count; ++jj) {
        auto j = static_cast<std::size_t>(jj);
        try {
            results[j] = run_cell(jobs[j].task, *jobs[j].cell, folds, corpus, shared, options);
        } catch (...) {
            failures[j] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f)
            std::rethrow_exception(f);

    ExperimentRun run;
    run.report = build_report(corpus, results, options);
    const CellSpec* error_cell = nullptr;
    for (const auto& c : cells)
        if (c.name == "all")
            error_cell = &c;
    for (const auto& c : cells)
        if (!error_cell && !c.majority)
            error_cell = &c;
    if (error_cell) {
        for (const auto& r : results) {
            if (r.cell != error_cell->name)
                continue;
            auto rows = dump_errors(r, corpus, featurizer, options.top_k);
            run.errors.insert(run.errors.end(), rows.begin(), rows.end());
        }
    }
    run.results = std::move(results);
    return run;
}

void write_report_dir(const std::filesystem::path& dir, const ExperimentRun& run)
{
    std::filesystem::create_directories(dir);
    auto open = [&](const char* file) {
        std::ofstream out(dir / file, std::ios::binary);
        if (!out)
            throw IngestionError("cannot write " + (dir / file).string());
        return out;
    };
    {
        auto out = open("table.tsv");
        write_table_tsv(out, run.report);
    }
    {
        auto out = open("table.txt");
        write_table_txt(out, run.report);
    }
    {
        auto out = open("errors.jsonl");
        write_errors(out, run.errors);
    }
}

} // namespace trollkit
