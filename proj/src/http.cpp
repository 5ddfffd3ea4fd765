#include <httplib.h>

#include "trollkit/errors.hpp"
#include "trollkit/service.hpp"

namespace trollkit {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json agreement_json(const AgreementReport& report, const AnnotatorPair& who)
{
    ordered_json j;
    j["annotators"] = {who.a, who.b};
    j["no_overlap"] = report.no_overlap;
    auto rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json rj;
        rj["aspect"] = name(r.aspect);
        rj["defined"] = r.defined;
        rj["n"] = r.terms.n;
        rj["p_o"] = r.terms.observed;
        rj["p_e"] = r.terms.chance;
        if (r.defined)
            rj["kappa"] = r.terms.kappa;
        else
            rj["kappa"] = nullptr;
        rows.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows);
    return j;
}

ordered_json discrepancies_json(const DiscrepancyList& list, const AnnotatorPair& who)
{
    ordered_json j;
    j["annotators"] = {who.a, who.b};
    j["no_overlap"] = list.no_overlap;
    auto items = ordered_json::array();
    for (const auto& d : list.items)
        items.push_back(
            ordered_json{{"item_id", d.item_id}, {"aspect", d.aspect}, {"label_a", d.label_a}, {"label_b", d.label_b}});
    j["items"] = std::move(items);
    return j;
}

ordered_json stats_json(const AnnotationStore& store)
{
    ordered_json j;
    j["phase"] = store.phase() == Phase::Training ? "training" : "production";
    j["snippets"] = store.snippet_count();
    j["double_quota"] = store.policy().double_quota;
    auto per = ordered_json::object();
    for (const auto& [who, p] : store.progress())
        per[who] = ordered_json{{"annotated", p.annotated}, {"discarded", p.discarded}};
    j["annotators"] = std::move(per);
    std::size_t doubly = 0, covered = 0;
    for (const auto& [id, who] : store.coverage()) {
        covered += !who.empty();
        doubly += who.size() >= 2;
    }
    j["snippets_annotated"] = covered;
    j["snippets_doubly_annotated"] = doubly;
    j["gold"] = to_json(store.stats());
    return j;
}

namespace {

void send(httplib::Response& res, int status, const ordered_json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message)
{
    send(res, status, ordered_json{{"error", message}});
}

std::optional<AnnotatorPair> pair_from(const httplib::Request& req)
{
    if (req.has_param("a") && req.has_param("b"))
        return AnnotatorPair{req.get_param_value("a"), req.get_param_value("b")};
    return std::nullopt;
}

json parse_body(const httplib::Request& req)
{
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw InputError("request body is not a JSON object");
    return j;
}

template <typename Handler>
httplib::Server::Handler guarded(Handler h)
{
    return [h](const httplib::Request& req, httplib::Response& res) {
        try {
            h(req, res);
        } catch (const InputError& e) {
            send_error(res, 400, e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

} // namespace

void install_routes(httplib::Server& server, AnnotationStore& store, const ServerOptions& options)
{
    server.Get("/api/schema", guarded([](const httplib::Request&, httplib::Response& res) {
        send(res, 200, schema_json());
    }));

    server.Get("/api/snippets/next", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string who = req.get_param_value("annotator");
        if (who.empty())
            return send_error(res, 400, "missing annotator parameter");
        auto s = store.next_snippet(who);
        ordered_json body;
        body["annotator"] = who;
        if (s) {
            body["done"] = false;
            body["snippet"] = to_json(*s);
        } else {
            body["done"] = true;
            body["snippet"] = nullptr;
        }
        send(res, 200, body);
    }));

    server.Post("/api/annotations", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        SnippetAnnotation a = annotation_from_json(parse_body(req));
        auto result = store.submit(std::move(a));
        ordered_json body;
        body["status"] = status_name(result.status);
        auto v = ordered_json::array();
        for (auto x : result.violations)
            v.push_back(name(x));
        body["violations"] = std::move(v);
        if (!result.message.empty())
            body["message"] = result.message;
        send(res, result.accepted() ? 201 : 422, body);
    }));

    server.Get("/api/agreement", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        AnnotatorPair used;
        const bool weighted = req.get_param_value("weighted") == "linear";
        auto report = store.agreement(pair_from(req), weighted, &used);
        auto body = agreement_json(report, used);
        body["weighting"] = weighted ? "linear" : "none";
        send(res, 200, body);
    }));

    server.Get("/api/discrepancies", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        AnnotatorPair used;
        auto list = store.discrepancies(pair_from(req), &used);
        send(res, 200, discrepancies_json(list, used));
    }));

    server.Post("/api/adjudications", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        json j = parse_body(req);
        auto aspect = try_parse<Aspect>(j.value("aspect", std::string()));
        if (!aspect)
            return send(res, 422,
                        ordered_json{{"status", "rejected"}, {"violations", ordered_json::array()},
                                     {"message", "aspect must be one of I, D, R, B"}});
        Adjudication adj;
        adj.item_id = j.at("item_id").get<std::string>();
        adj.aspect = *aspect;
        adj.label = j.at("label").get<std::string>();
        adj.resolver_id = j.value("resolver_id", std::string());
        adj.submitted_at = j.value("submitted_at", std::string());
        auto result = store.adjudicate(std::move(adj));
        ordered_json body{{"status", result.accepted ? "accepted" : "rejected"}, {"violations", ordered_json::array()}};
        if (!result.message.empty())
            body["message"] = result.message;
        send(res, result.accepted ? 201 : 422, body);
    }));

    server.Get("/api/stats", guarded([&store](const httplib::Request&, httplib::Response& res) {
        send(res, 200, stats_json(store));
    }));

    server.Get("/api/export/gold", guarded([&store](const httplib::Request&, httplib::Response& res) {
        auto gold = store.export_gold();
        auto list = ordered_json::array();
        for (const auto& a : gold.gold)
            list.push_back(to_json(a));
        send(res, 200, ordered_json{{"gold", std::move(list)}, {"unresolved", gold.unresolved}});
    }));

    server.Get("/api/phase", guarded([&store](const httplib::Request&, httplib::Response& res) {
        send(res, 200, ordered_json{{"phase", store.phase() == Phase::Training ? "training" : "production"}});
    }));

    server.Post("/api/phase", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string p = parse_body(req).value("phase", std::string());
        if (p != "training" && p != "production")
            return send_error(res, 400, "phase must be training or production");
        store.set_phase(p == "training" ? Phase::Training : Phase::Production);
        send(res, 200, ordered_json{{"phase", p}});
    }));

    if (options.static_dir) {
        if (!server.set_mount_point("/", options.static_dir->string()))
            throw InputError("static directory " + options.static_dir->string() + " does not exist");
    }
}

} // namespace trollkit
