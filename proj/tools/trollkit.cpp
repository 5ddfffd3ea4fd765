#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "trollkit/agreement.hpp"
#include "trollkit/corpus.hpp"
#include "trollkit/errors.hpp"
#include "trollkit/experiments.hpp"
#include "trollkit/features.hpp"
#include "trollkit/model.hpp"
#include "trollkit/parallel.hpp"
#include "trollkit/schema.hpp"
#include "trollkit/service.hpp"

#ifndef TROLLKIT_RESOURCE_DIR
#define TROLLKIT_RESOURCE_DIR "resources"
#endif

namespace fs = std::filesystem;
using namespace trollkit;

namespace {

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::ofstream open_out(const fs::path& path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IngestionError("cannot write " + path.string());
    return out;
}

// A file of annotations, or a store directory holding annotations.jsonl and
// optionally adjudications.jsonl.
struct AnnotationSource {
    std::vector<SnippetAnnotation> annotations;
    std::vector<Adjudication> adjudications;
};

AnnotationSource load_annotations(const fs::path& path)
{
    AnnotationSource src;
    if (!fs::is_directory(path)) {
        src.annotations = read_annotations_file(path);
        return src;
    }
    src.annotations = read_annotations_file(path / AnnotationStore::kAnnotationLog);
    const auto adj = path / AnnotationStore::kAdjudicationLog;
    if (fs::exists(adj)) {
        std::ifstream in(adj, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            src.adjudications.push_back(adjudication_from_json(nlohmann::json::parse(line)));
        }
    }
    return src;
}

LinguisticResources load_resources(const std::string& dir, const std::string& embeddings, const std::string& sidecar)
{
    std::optional<fs::path> emb;
    if (!embeddings.empty() && embeddings != "none")
        emb = embeddings;
    auto r = LinguisticResources::load(dir, emb);
    if (!sidecar.empty())
        r.sidecar = SidecarIndex::read_file(sidecar);
    return r;
}

std::string fixed(double v, int digits)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

httplib::Server* g_server = nullptr;

void stop_server(int)
{
    if (g_server)
        g_server->stop();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"trollkit: trolling-attempt mining, annotation and classification workbench"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "OpenMP worker threads (0 = runtime default)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse a comment dump and rebuild conversation threads");
    std::string dump_path, dump_fmt = "reddit-jsonl", threads_out;
    ingest->add_option("--dump", dump_path, "Line-delimited JSON dump")->required();
    ingest->add_option("--format", dump_fmt, "Dump format id: jsonl or reddit-jsonl")->capture_default_str();
    ingest->add_option("--out", threads_out, "Thread file to write")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "Mine suspected trolling-attempt snippets from threads");
    std::string threads_in, snippets_out;
    TriggerConfig trigger;
    extract->add_option("--threads", threads_in, "Thread file from ingest")->required();
    extract->add_option("--out", snippets_out, "Snippet file to write")->required();
    extract->add_option("--trigger", trigger.trigger, "Trigger word")->capture_default_str();
    extract->add_option("--max-dist", trigger.max_distance, "Maximum edit distance")->capture_default_str();

    // kappa
    auto* kappa = app.add_subcommand("kappa", "Cohen's kappa per aspect for two annotators");
    std::string kappa_ann, kappa_who;
    bool kappa_weighted = false, kappa_discrepancies = false;
    kappa->add_option("--annotations", kappa_ann, "Annotation file or store directory")->required();
    kappa->add_option("--annotators", kappa_who, "Two annotator ids, a,b (default: the busiest pair)");
    kappa->add_flag("--linear-weighted", kappa_weighted, "Linear-weighted kappa");
    kappa->add_flag("--discrepancies", kappa_discrepancies, "Also list disagreeing items");

    // stats
    auto* stats = app.add_subcommand("stats", "Per-aspect class distribution of the gold labels");
    std::string stats_ann;
    stats->add_option("--annotations", stats_ann, "Annotation file or store directory")->required();

    // shared evaluation inputs
    std::string snippets_in, annotations_in, resources_dir = TROLLKIT_RESOURCE_DIR,
                                             embeddings = "embeddings/synthetic-50d.txt", sidecar;
    FeatureOptions feat_opts;
    auto add_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--snippets", snippets_in, "Snippet file")->required();
        cmd->add_option("--annotations", annotations_in, "Annotation file or store directory")->required();
        cmd->add_option("--resources", resources_dir, "Resource directory")->capture_default_str();
        cmd->add_option("--embeddings", embeddings, "Embedding file, relative to resources or absolute; none to skip")
            ->capture_default_str();
        cmd->add_option("--sidecar", sidecar, "Sidecar annotation file (tokens, lemmas, POS, frames)");
        cmd->add_flag("--with-parent", feat_opts.with_parent, "Add context-comment features");
        cmd->add_flag("--with-attempt", feat_opts.with_attempt, "R/B: add attempt features");
        cmd->add_option("--min-df", feat_opts.min_df, "Minimum training document frequency")->capture_default_str();
    };

    // vectorize
    auto* vectorize = app.add_subcommand("vectorize", "Write the vectorized dataset of one task");
    add_inputs(vectorize);
    std::string vec_task = "I", vec_groups = "all", vec_out;
    vectorize->add_option("--task", vec_task, "I, D, R or B")->capture_default_str();
    vectorize->add_option("--groups", vec_groups, "Feature groups")->capture_default_str();
    vectorize->add_option("--out", vec_out, "Vector file")->required();

    // train
    auto* trainc = app.add_subcommand("train", "Train a logistic-regression model on a vector file");
    std::string train_vectors, model_out;
    double train_lambda = 1e-2;
    trainc->add_option("--vectors", train_vectors, "Vector file from vectorize")->required();
    trainc->add_option("--lambda", train_lambda, "L2 strength")->capture_default_str();
    trainc->add_option("--out", model_out, "Model file")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "5-fold cross-validation over the experiment matrix");
    add_inputs(evaluate);
    std::string cells = "majority,single,all", groups = "all", report_dir = "report";
    ExperimentOptions exp_opts;
    evaluate->add_option("--cells", cells, "majority, single, all, or group names")->capture_default_str();
    evaluate->add_option("--groups", groups, "Groups used by the single cells")->capture_default_str();
    evaluate->add_option("--seed", exp_opts.seed, "Fold seed")->capture_default_str();
    evaluate->add_option("--top-k", exp_opts.top_k, "Features listed per error")->capture_default_str();
    evaluate->add_option("--out", report_dir, "Report directory")->capture_default_str();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the annotation HTTP backend");
    std::string serve_snippets, store_dir, host = "127.0.0.1", static_dir;
    int port = 8080;
    AssignmentPolicy policy;
    serve->add_option("--snippets", serve_snippets, "Snippet file")->required();
    serve->add_option("--store", store_dir, "Store directory")->required();
    serve->add_option("--port", port, "Port")->capture_default_str();
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--double-quota", policy.double_quota, "Snippets wanting two annotators")
        ->capture_default_str();
    serve->add_option("--static", static_dir, "Static UI bundle directory");

    CLI11_PARSE(app, argc, argv);
    set_threads(threads);

    try {
        if (*ingest) {
            auto parsed = parse_dump_file(dump_path, dump_format(dump_fmt));
            auto threads_map = build_threads(parsed.comments);
            std::size_t orphans = 0;
            for (const auto& [id, t] : threads_map)
                orphans += t.orphans.size();
            auto out = open_out(threads_out);
            write_threads(out, threads_map);
            std::cerr << "records " << parsed.records << ", malformed " << parsed.malformed << ", comments "
                      << parsed.comments.size() << ", threads " << threads_map.size() << ", orphans " << orphans
                      << '\n';
        } else if (*extract) {
            std::ifstream in(threads_in, std::ios::binary);
            if (!in)
                throw IngestionError("cannot open " + threads_in);
            auto threads_map = read_threads(in);
            ExtractStats st;
            auto snippets = mine_snippets(threads_map, trigger, &st);
            auto out = open_out(snippets_out);
            write_snippets(out, snippets);
            std::cerr << "suspects " << st.suspects << ", snippets " << st.emitted << ", dropped " << st.dropped
                      << '\n';
        } else if (*kappa) {
            auto src = load_annotations(kappa_ann);
            std::optional<AnnotatorPair> who;
            if (!kappa_who.empty()) {
                auto ids = split_list(kappa_who);
                if (ids.size() != 2)
                    throw InputError("--annotators takes exactly two ids");
                who = AnnotatorPair{ids[0], ids[1]};
            } else {
                who = busiest_pair(src.annotations);
                if (!who)
                    throw InputError("need annotations from at least two annotators");
            }
            auto report = agreement_report(src.annotations, *who, kappa_weighted);
            std::cout << "annotators " << who->a << " " << who->b << (kappa_weighted ? " (linear-weighted)" : "")
                      << '\n';
            if (report.no_overlap)
                std::cout << "warning: the annotators share no snippet\n";
            std::cout << "aspect\tn\tp_o\tp_e\tkappa\n";
            for (const auto& r : report.rows) {
                std::cout << name(r.aspect) << '\t' << r.terms.n << '\t' << fixed(r.terms.observed, 4) << '\t'
                          << fixed(r.terms.chance, 4) << '\t' << (r.defined ? fixed(r.terms.kappa, 3) : "-") << '\n';
            }
            if (kappa_discrepancies) {
                for (const auto& d : discrepancies(src.annotations, *who).items)
                    std::cout << "discrepancy\t" << d.item_id << '\t' << d.aspect << '\t' << d.label_a << '\t'
                              << d.label_b << '\n';
            }
        } else if (*stats) {
            auto src = load_annotations(stats_ann);
            auto gold = export_gold(src.annotations, src.adjudications);
            auto dist = distribution(gold.gold);
            std::cout << "attempts " << dist.attempts << ", responses " << dist.responses << '\n';
            for (auto a : kAspects) {
                std::cout << aspect_title(a) << '\n';
                for (const auto& c : dist[a])
                    std::cout << "  " << c.label << '\t' << fixed(c.percent, 1) << "% (" << c.count << ")\n";
            }
            if (!gold.unresolved.empty())
                std::cout << "unresolved " << gold.unresolved.size() << '\n';
        } else if (*vectorize || *evaluate) {
            auto snippets = read_snippets_file(snippets_in);
            auto src = load_annotations(annotations_in);
            auto gold = export_gold(src.annotations, src.adjudications);
            auto corpus = LabeledCorpus::join(snippets, gold.gold);
            auto resources = load_resources(resources_dir, embeddings, sidecar);
            Featurizer featurizer(resources, feat_opts);
            if (*vectorize) {
                const Aspect task = parse<Aspect>(vec_task);
                const GroupSet gs = parse_groups(vec_groups);
                auto inst = task_instances(corpus, task);
                featurizer.prepare(corpus.snippets);
                auto space = featurizer.build_space(corpus.snippets, inst, gs);
                const FeatureSpace& frozen = space;
                VectorizedDataset data;
                data.task = task;
                data.groups = gs;
                data.width = frozen.width();
                data.dense_offset = frozen.dense_offset();
                data.dense_width = frozen.dense_width();
                data.classes = class_names(task);
                for (const auto& i : inst) {
                    data.labels.push_back(i.label);
                    data.vectors.push_back(
                        featurizer.featurize(corpus.snippets[i.snippet], task, i.response, frozen, gs));
                }
                auto out = open_out(vec_out);
                write_vectors(out, data);
                std::cerr << "instances " << inst.size() << ", columns " << data.width << '\n';
            } else {
                auto specs = expand_cells(cells, parse_groups(groups));
                auto run = run_experiments(corpus, specs, featurizer, exp_opts);
                write_report_dir(report_dir, run);
                write_table_txt(std::cout, run.report);
                std::cerr << "snippets " << corpus.snippets.size() << ", errors " << run.errors.size()
                          << ", report in " << report_dir << '\n';
            }
        } else if (*trainc) {
            std::ifstream in(train_vectors, std::ios::binary);
            if (!in)
                throw IngestionError("cannot open " + train_vectors);
            auto data = read_vectors(in);
            std::vector<std::string> present;
            for (const auto& c : data.classes)
                if (std::find(data.labels.begin(), data.labels.end(), c) != data.labels.end())
                    present.push_back(c);
            auto ds = Dataset::from_labels(data.vectors, data.labels, present, data.dense_offset, data.dense_width);
            auto model = train(ds, train_lambda);
            save_model_file(model_out, model);
            std::cerr << "iterations " << model.info.iterations << ", objective " << model.info.objective
                      << ", converged " << (model.info.converged ? "yes" : "no") << '\n';
        } else if (*serve) {
            AnnotationStore store(read_snippets_file(serve_snippets), store_dir, policy);
            httplib::Server server;
            ServerOptions opts;
            if (!static_dir.empty())
                opts.static_dir = static_dir;
            install_routes(server, store, opts);
            g_server = &server;
            std::signal(SIGINT, stop_server);
            std::signal(SIGTERM, stop_server);
            std::cerr << "serving " << store.snippet_count() << " snippets on http://" << host << ":" << port << '\n';
            if (!server.listen(host, port))
                throw IngestionError("cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const trollkit::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
