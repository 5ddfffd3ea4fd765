// Acceptance suite: one PASS/FAIL/SKIP line per criterion, non-zero exit on any FAIL.
//
// The gold-data checks run only when TROLLKIT_GOLD_DIR names a directory with
// snippets.jsonl, annotations.jsonl and optionally adjudications.jsonl.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "trollkit/agreement.hpp"
#include "trollkit/corpus.hpp"
#include "trollkit/experiments.hpp"
#include "trollkit/features.hpp"
#include "trollkit/model.hpp"
#include "trollkit/schema.hpp"

using namespace trollkit;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome = Outcome::Pass;
    std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Verdict skip(std::string d) { return {Outcome::Skip, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// --- constraint algebra ------------------------------------------------------

bool oracle_attempt(Intention i, Disclosure d)
{
    if (i == Intention::NoTrolling)
        return d == Disclosure::None;
    return d != Disclosure::None;
}

bool oracle_response(Interpretation r, Strategy b) { return r == Interpretation::NoTrolling || b != Strategy::Normal; }

std::uint64_t brute_force(unsigned n)
{
    std::uint64_t valid = 0;
    std::vector<unsigned> digits(n, 0);
    for (int i = 0; i < 3; ++i)
        for (int d = 0; d < 3; ++d) {
            std::fill(digits.begin(), digits.end(), 0u);
            while (true) {
                bool ok = oracle_attempt(static_cast<Intention>(i), static_cast<Disclosure>(d));
                for (auto x : digits)
                    ok = ok && oracle_response(static_cast<Interpretation>(x / 7), static_cast<Strategy>(x % 7));
                valid += ok;
                std::size_t k = 0;
                while (k < n && ++digits[k] == 21)
                    digits[k++] = 0;
                if (k == n)
                    break;
            }
        }
    return valid;
}

Verdict constraint_algebra()
{
    auto t0 = std::chrono::steady_clock::now();
    int attempts = 0, attempt_total = 0, responses = 0, response_total = 0;
    for (auto i : all_values<Intention>())
        for (auto d : all_values<Disclosure>()) {
            ++attempt_total;
            attempts += attempt_pair_valid(i, d);
        }
    for (auto r : all_values<Interpretation>())
        for (auto b : all_values<Strategy>()) {
            ++response_total;
            responses += response_pair_valid(r, b);
        }
    std::uint64_t one = 0, one_total = 0;
    for (auto i : all_values<Intention>())
        for (auto d : all_values<Disclosure>())
            for (auto r : all_values<Interpretation>())
                for (auto b : all_values<Strategy>()) {
                    ++one_total;
                    ResponsePair p{r, b};
                    one += validate_combination(i, d, std::span<const ResponsePair>(&p, 1)).empty();
                }
    if (attempts != 5 || attempt_total != 9 || responses != 19 || response_total != 21 || one != 95 ||
        one_total != 189)
        return fail("counts " + std::to_string(attempts) + "/" + std::to_string(attempt_total) + ", " +
                    std::to_string(responses) + "/" + std::to_string(response_total) + ", " + std::to_string(one) +
                    "/" + std::to_string(one_total));
    std::uint64_t expected = 5;
    for (unsigned n = 0; n <= 4; ++n, expected *= 19) {
        if (enumerate_valid(n) != expected)
            return fail("enumerate_valid(" + std::to_string(n) + ") = " + std::to_string(enumerate_valid(n)));
        if (brute_force(n) != expected)
            return fail("brute force disagrees at n=" + std::to_string(n));
    }
    double t = seconds_since(t0);
    if (t >= 1.0)
        return fail("took " + fmt("%.3f", t) + " s");
    return pass("5/9, 19/21, 95/189, 5*19^n for n<=4, oracle agrees, " + fmt("%.3f", t) + " s");
}

// --- majority identity -------------------------------------------------------

Verdict majority_identity()
{
    std::mt19937_64 rng(41);
    const auto classes = class_names(Aspect::B);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> gold;
        const std::size_t k = 2 + rng() % (classes.size() - 1);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t m = rng() % 60; m > 0; --m)
                gold.push_back(classes[c]);
        if (gold.empty())
            gold.push_back(classes[0]);
        std::shuffle(gold.begin(), gold.end(), rng);
        auto mj = MajorityModel::fit(gold);
        std::vector<std::string> pred(gold.size(), mj.label);
        auto m = metrics(gold, pred, classes);
        const double p = static_cast<double>(std::count(gold.begin(), gold.end(), mj.label)) / gold.size();
        const auto pos = std::find(classes.begin(), classes.end(), mj.label) - classes.begin();
        worst = std::max(worst, std::abs(m.per_class[pos].f1 - 2 * p / (1 + p)));
    }
    if (worst > 1e-9)
        return fail("max deviation " + fmt("%.3g", worst));

    // 535 of 1000 attempts in the first class, rendered through the report table.
    const auto ic = class_names(Aspect::I);
    std::vector<std::string> gold;
    gold.insert(gold.end(), 535, ic[0]);
    gold.insert(gold.end(), 300, ic[1]);
    gold.insert(gold.end(), 165, ic[2]);
    std::vector<std::string> pred(gold.size(), MajorityModel::fit(gold).label);
    EvalReport report;
    CellReport cell;
    cell.cell = "mjr";
    cell.per_task[Aspect::I] = metrics(gold, pred, ic);
    report.cells.push_back(cell);
    for (auto task : kAspects)
        for (const auto& c : class_names(task))
            report.size[task].push_back({c, 0, 0.0});
    std::ostringstream tsv;
    write_table_tsv(tsv, report);
    const std::string want = ic[0] + "\t69.7\t";
    if (tsv.str().find("\n" + want) == std::string::npos)
        return fail("p=0.535 row not printed as 69.7");
    return pass("50 multisets within " + fmt("%.1g", worst) + ", p=0.535 prints 69.7");
}

// --- kappa -------------------------------------------------------------------

Verdict kappa_checks()
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng() % 6;
        ConfusionMatrix m(k);
        for (std::size_t i = 0; i < k; ++i)
            m.add(i, i, rng() % 20);
        m.add(rng() % k, 0, 0);
        if (m.total() == 0)
            m.add(0, 0, 3);
        if (cohen_kappa(m) != 1.0)
            return fail("perfect agreement kappa " + fmt("%.17g", cohen_kappa(m)));
    }
    ConfusionMatrix constant(3);
    constant.add(1, 1, 7);
    if (cohen_kappa(constant) != 1.0)
        return fail("constant raters not 1");
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng() % 6;
        std::vector<std::uint64_t> r(k), c(k);
        for (auto& x : r)
            x = 1 + rng() % 9;
        for (auto& x : c)
            x = 1 + rng() % 9;
        ConfusionMatrix m(k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                m.add(i, j, r[i] * c[j]);
        worst = std::max(worst, std::abs(cohen_kappa(m)));
    }
    if (worst > 1e-9)
        return fail("chance-structured kappa " + fmt("%.3g", worst));
    ConfusionMatrix hand(2, {20, 5, 10, 15});
    const double kh = cohen_kappa(hand);
    if (std::abs(kh - 0.40) > 1e-12)
        return fail("[[20,5],[10,15]] gave " + fmt("%.17g", kh));
    return pass("perfect = 1 exactly, chance within " + fmt("%.1g", worst) + ", hand-worked " + fmt("%.15f", kh));
}

// --- optimizer ---------------------------------------------------------------

Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d_sparse, std::size_t d_dense, std::size_t k)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<FeatureVector> rows(n);
    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < d_sparse; ++j)
            if (rng() % 3 == 0)
                rows[i].sparse.emplace_back(j, unit(rng));
        for (std::size_t j = 0; j < d_dense; ++j)
            rows[i].dense.push_back(unit(rng));
        labels[i] = static_cast<std::uint32_t>(i < k ? i : rng() % k);
    }
    std::vector<std::string> classes;
    for (std::size_t c = 0; c < k; ++c)
        classes.push_back("c" + std::to_string(c));
    return Dataset(rows, labels, classes, d_sparse, d_dense);
}

double norm(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

Verdict optimizer_checks()
{
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 19, ds = rng() % 6, dd = rng() % 5, k = 2 + rng() % 3;
        auto data = random_dataset(rng, n, ds, dd, k);
        const double lambda = trial % 4 == 0 ? 0.0 : std::pow(10.0, -3.0 + static_cast<double>(rng() % 5));
        std::vector<double> params(k * (ds + dd) + k);
        for (auto& p : params)
            p = unit(rng);
        std::vector<double> grad(params.size()), fd(params.size());
        kernels::objective_gradient(data, params, lambda, grad);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double h = 1e-5;
            auto plus = params, minus = params;
            plus[j] += h;
            minus[j] -= h;
            fd[j] = (kernels::objective(data, plus, lambda) - kernels::objective(data, minus, lambda)) / (2 * h);
        }
        std::vector<double> diff(params.size());
        for (std::size_t j = 0; j < params.size(); ++j)
            diff[j] = grad[j] - fd[j];
        worst = std::max(worst, norm(diff) / std::max({norm(grad), norm(fd), 1e-12}));
    }
    if (worst > 1e-5)
        return fail("gradient relative error " + fmt("%.3g", worst));

    // Three well-separated clusters of 100 points in the plane.
    std::normal_distribution<double> noise(0.0, 0.5);
    const double centers[3][2] = {{0.0, 4.0}, {-4.0, -3.0}, {4.0, -3.0}};
    std::vector<FeatureVector> rows;
    std::vector<std::uint32_t> labels;
    for (std::uint32_t c = 0; c < 3; ++c)
        for (int i = 0; i < 100; ++i) {
            FeatureVector x;
            x.dense = {centers[c][0] + noise(rng), centers[c][1] + noise(rng)};
            rows.push_back(x);
            labels.push_back(c);
        }
    Dataset sep(rows, labels, {"a", "b", "c"}, 0, 2);
    auto t0 = std::chrono::steady_clock::now();
    auto m1 = train(sep, 1e-4);
    const double t = seconds_since(t0);
    for (std::size_t s = 1; s < m1.info.history.size(); ++s)
        if (m1.info.history[s] > m1.info.history[s - 1])
            return fail("objective rose at step " + std::to_string(s));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        correct += predict(m1, rows[i]) == labels[i];
    const double acc = static_cast<double>(correct) / rows.size();
    if (acc < 0.99)
        return fail("separable training accuracy " + fmt("%.4f", acc));
    if (t >= 5.0)
        return fail("separable training took " + fmt("%.2f", t) + " s");
    auto m2 = train(sep, 1e-4);
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
    };
    if (!same(m1.weights, m2.weights) || !same(m1.bias, m2.bias) || !same(m1.info.history, m2.info.history))
        return fail("two training runs differ");
    return pass("FD error " + fmt("%.2g", worst) + ", monotone, separable acc " + fmt("%.3f", acc) + " in " +
                fmt("%.2f", t) + " s, bit-identical rerun");
}

// --- pipeline ----------------------------------------------------------------

struct ReportBytes {
    std::string tsv, errors;
    EvalReport report;
};

std::vector<Adjudication> read_adjudications(const fs::path& path)
{
    std::vector<Adjudication> out;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            out.push_back(adjudication_from_json(nlohmann::json::parse(line)));
    return out;
}

LabeledCorpus load_corpus(const fs::path& dir)
{
    auto snippets = read_snippets_file(dir / "snippets.jsonl");
    auto annotations = read_annotations_file(dir / "annotations.jsonl");
    std::vector<Adjudication> adj;
    if (fs::exists(dir / "adjudications.jsonl"))
        adj = read_adjudications(dir / "adjudications.jsonl");
    return LabeledCorpus::join(snippets, export_gold(annotations, adj).gold);
}

ReportBytes run_pipeline(const LabeledCorpus& corpus, const std::string& cells)
{
    auto resources = LinguisticResources::load(TROLLKIT_RESOURCE_DIR, fs::path("embeddings/synthetic-50d.txt"));
    const fs::path frames = fs::path(TROLLKIT_DATA_DIR) / "synthetic" / "frames.jsonl";
    resources.sidecar = SidecarIndex::read_file(frames);
    Featurizer featurizer(resources);
    auto run = run_experiments(corpus, expand_cells(cells, parse_groups("all")), featurizer);
    ReportBytes out;
    std::ostringstream tsv, err;
    write_table_tsv(tsv, run.report);
    write_errors(err, run.errors);
    out.tsv = tsv.str();
    out.errors = err.str();
    out.report = run.report;
    return out;
}

const CellReport* find_cell(const EvalReport& r, const std::string& name)
{
    for (const auto& c : r.cells)
        if (c.cell == name)
            return &c;
    return nullptr;
}

Verdict pipeline_checks()
{
    auto t0 = std::chrono::steady_clock::now();
    auto corpus = load_corpus(fs::path(TROLLKIT_DATA_DIR) / "synthetic");
    auto first = run_pipeline(corpus, "majority,single,all");
    const double t = seconds_since(t0);
    auto second = run_pipeline(corpus, "majority,single,all");
    if (first.tsv != second.tsv || first.errors != second.errors)
        return fail("report differs between two runs with seed 13");
    const auto* mjr = find_cell(first.report, "mjr");
    const auto* all = find_cell(first.report, "all");
    if (!mjr || !all)
        return fail("missing mjr or all column");
    std::string detail = std::to_string(corpus.snippets.size()) + " snippets;";
    for (auto task : kAspects) {
        const double a = all->per_task.at(task).accuracy, m = mjr->per_task.at(task).accuracy;
        detail += " " + std::string(name(task)) + " " + fmt("%.3f", a) + ">" + fmt("%.3f", m);
        if (!(a > m))
            return fail("task " + std::string(name(task)) + ": all " + fmt("%.4f", a) + " <= majority " +
                        fmt("%.4f", m));
    }
    if (t >= 60.0)
        return fail("full run took " + fmt("%.1f", t) + " s");
    return pass(detail + ", byte-identical rerun, " + fmt("%.2f", t) + " s");
}

// --- mining ------------------------------------------------------------------

Comment make(std::string id, std::optional<std::string> parent, std::string body, std::int64_t t)
{
    Comment c;
    c.id = std::move(id);
    c.parent_id = std::move(parent);
    c.thread_id = "t1";
    c.author = "someone";
    c.body = std::move(body);
    c.created_utc = t;
    c.deleted = c.body == "[deleted]";
    return c;
}

Verdict mining_checks()
{
    const std::vector<Comment> comments{
        make("c01", std::nullopt, "Anyone tried the new patch?", 100),
        make("c02", "c01", "The patch is garbage and so are you", 101),
        make("c03", "c02", "You must be a troll.", 102),
        make("c04", "c02", "Agreed, terrible patch", 103),
        make("c05", "c01", "I like it a lot", 104),
        make("c06", "c05", "stop trolling me", 105),
        make("c07", "c05", "trolling, trolling everywhere", 106),
        make("c08", "c01", "Best patch ever, devs are geniuses", 107),
        make("c09", "c08", "TROLLS everywhere", 108),
        make("c10", "c09", "[deleted]", 109),
        make("c11", "c09", "nah", 110),
        make("c12", "c01", "[deleted]", 111),
        make("c13", "c12", "what a trol", 112),
        make("c14", "c01", "Cats are better than dogs", 113),
        make("c15", "c14", "[deleted]", 114),
        make("c16", "c14", "brotroll harder", 115),
        make("c17", "c14", "nice tr0ll lol", 116),
        make("c18", std::nullopt, "Mods are asleep, post cats", 117),
        make("c19", "c18", "Drool-worthy cat pics incoming", 118),
        make("c20", "c18", "go away troll", 119),
        make("c21", "c18", "[deleted]", 120),
        make("c22", "c20", "no u", 121),
        make("c23", "c22", "Trolll detected", 122),
        make("c24", "c23", "sure", 123),
        make("c25", "c24", "[deleted]", 124),
    };
    auto threads = build_threads(comments);
    const auto& thread = threads.at("t1");

    // Independent expectation: parents of children holding a letter run within one edit of "troll".
    auto near = [](const std::string& body) {
        for (const auto& w : letter_tokens(body))
            if (levenshtein(w, "troll") <= 1)
                return true;
        return false;
    };
    std::set<std::string> expected;
    for (const auto& c : comments)
        if (c.parent_id && near(c.body))
            expected.insert(*c.parent_id);
    const std::set<std::string> listed{"c02", "c08", "c12", "c18", "c22"};
    if (expected != listed)
        return fail("fixture expectation drifted");
    auto suspects = find_suspects(thread);
    if (suspects != expected)
        return fail("suspects differ from the parents of trigger children");
    if (suspects.count("c05"))
        return fail("trolling-only replies produced a suspect");

    auto snippets = mine_snippets(threads);
    std::set<std::string> deleted;
    for (const auto& c : comments)
        if (c.deleted)
            deleted.insert(c.id);
    for (const auto& s : snippets) {
        if (deleted.count(s.attempt.id) || (s.context && deleted.count(s.context->id)))
            return fail("deleted comment in snippet " + s.snippet_id);
        for (const auto& r : s.responses)
            if (deleted.count(r.id))
                return fail("deleted response in snippet " + s.snippet_id);
    }
    if (snippets.size() != 4)
        return fail("expected 4 snippets, got " + std::to_string(snippets.size()));
    return pass("suspects {c02,c08,c12,c18,c22}, 4 snippets, none deleted");
}

// --- gold data ---------------------------------------------------------------

std::optional<fs::path> gold_dir()
{
    const char* env = std::getenv("TROLLKIT_GOLD_DIR");
    if (!env || !*env)
        return std::nullopt;
    return fs::path(env);
}

Verdict gold_kappa()
{
    auto dir = gold_dir();
    if (!dir)
        return skip("TROLLKIT_GOLD_DIR not set; released double annotations not bundled");
    auto annotations = read_annotations_file(*dir / "annotations.jsonl");
    auto who = busiest_pair(annotations);
    if (!who)
        return fail("no doubly annotated snippets");
    auto report = agreement_report(annotations, *who);
    const double want[4] = {0.788, 0.780, 0.797, 0.776};
    std::string detail;
    for (std::size_t a = 0; a < 4; ++a) {
        const auto& row = report.rows[a];
        detail += " " + std::string(name(row.aspect)) + " " + fmt("%.3f", row.terms.kappa);
        if (!row.defined || std::abs(row.terms.kappa - want[a]) > 0.001)
            return fail("kappa" + detail);
    }
    return pass("kappa" + detail);
}

Verdict gold_distribution()
{
    auto dir = gold_dir();
    if (!dir)
        return skip("TROLLKIT_GOLD_DIR not set; released dataset not bundled");
    auto corpus = load_corpus(*dir);
    auto dist = distribution(corpus.labels);
    const std::vector<std::vector<std::size_t>> want{
        {537, 89, 375}, {347, 115, 539}, {785, 70, 461}, {354, 39, 316, 39, 171, 125, 272}};
    for (std::size_t a = 0; a < 4; ++a) {
        const auto task = kAspects[a];
        const auto classes = class_names(task);
        for (std::size_t k = 0; k < classes.size(); ++k) {
            std::size_t got = 0;
            for (const auto& c : dist[task])
                if (c.label == classes[k])
                    got = c.count;
            if (got != want[a][k])
                return fail(std::string(name(task)) + " " + classes[k] + " count " + std::to_string(got) +
                            ", expected " + std::to_string(want[a][k]));
        }
    }
    auto resources = LinguisticResources::load(TROLLKIT_RESOURCE_DIR);
    Featurizer featurizer(resources);
    auto run = run_experiments(corpus, expand_cells("majority", {}), featurizer);
    const double acc[4] = {53.5, 53.9, 59.2, 36.0};
    std::string detail = "counts match; majority accuracy";
    for (std::size_t a = 0; a < 4; ++a) {
        const double got = 100.0 * run.report.cells.at(0).per_task.at(kAspects[a]).accuracy;
        detail += " " + fmt("%.1f", got);
        if (std::abs(got - acc[a]) > 0.1)
            return fail(detail);
    }
    return pass(detail);
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"constraint-algebra", constraint_algebra},
        {"majority-baseline-identity", majority_identity},
        {"kappa", kappa_checks},
        {"kappa-on-gold-double-annotations", gold_kappa},
        {"optimizer", optimizer_checks},
        {"pipeline-end-to-end", pipeline_checks},
        {"snippet-mining", mining_checks},
        {"gold-distribution-and-majority-accuracy", gold_distribution},
    };
    int failures = 0;
    for (const auto& [label, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = fail(std::string("threw: ") + e.what());
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
        failures += v.outcome == Outcome::Fail;
        std::cout << tag << "  " << label << "  " << v.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
