#include <doctest.h>

#include <httplib.h>

#include <fstream>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "trollkit/service.hpp"

using namespace trollkit;
using nlohmann::json;

namespace {

std::vector<Snippet> four_snippets()
{
    return {fixtures::snippet("s1", 2), fixtures::snippet("s2", 1), fixtures::snippet("s3", 3),
            fixtures::snippet("s4", 1)};
}

SnippetAnnotation example2(const Snippet& s, const std::string& who)
{
    return fixtures::annotation(s, who, Intention::Trolling, Disclosure::Exposed,
                                {{Interpretation::Trolling, Strategy::Frustrate},
                                 {Interpretation::Trolling, Strategy::Troll}});
}

// Serves install_routes on an ephemeral localhost port for the test's lifetime.
class LiveServer {
public:
    explicit LiveServer(AnnotationStore& store)
    {
        install_routes(server_, store);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LiveServer()
    {
        server_.stop();
        thread_.join();
    }
    httplib::Client client() const
    {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(5, 0);
        return c;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace

TEST_CASE("assignment follows the double quota")
{
    fixtures::TempDir dir("quota");
    auto snippets = four_snippets();

    SUBCASE("fresh store, quota 1")
    {
        AnnotationStore store(snippets, dir.path(), AssignmentPolicy{1});
        CHECK(store.next_snippet("A")->snippet_id == "s1");
    }
    SUBCASE("quota 2 trace")
    {
        AnnotationStore store(snippets, dir.path(), AssignmentPolicy{2});
        REQUIRE(store.submit(example2(snippets[0], "A")).accepted());
        CHECK(store.next_snippet("A")->snippet_id == "s2");
        CHECK(store.next_snippet("B")->snippet_id == "s1");
        REQUIRE(store.submit(example2(snippets[0], "B")).accepted());
        auto third = store.submit(example2(snippets[0], "C"));
        CHECK(third.status == SubmitStatus::QuotaFull);
        CHECK(store.next_snippet("C")->snippet_id == "s2");
    }
    SUBCASE("all satisfied")
    {
        AnnotationStore store(snippets, dir.path(), AssignmentPolicy{0});
        for (const auto& s : snippets)
            REQUIRE(store.submit(fixtures::discard(s, "A")).accepted());
        CHECK_FALSE(store.next_snippet("A"));
        CHECK_FALSE(store.next_snippet("B"));
    }
}

TEST_CASE("submission verdicts")
{
    fixtures::TempDir dir("submit");
    auto snippets = four_snippets();
    AnnotationStore store(snippets, dir.path());

    CHECK(store.submit(example2(snippets[0], "A")).accepted());

    auto b = fixtures::annotation(snippets[1], "A", Intention::NoTrolling, Disclosure::Hidden,
                                  {{Interpretation::NoTrolling, Strategy::Normal}});
    auto rb = store.submit(b);
    CHECK(rb.status == SubmitStatus::Violation);
    CHECK(rb.violations == std::vector<Violation>{Violation::B});

    CHECK(store.submit(fixtures::discard(snippets[1], "A")).accepted());
    CHECK(store.submit(example2(snippets[0], "A")).status == SubmitStatus::Duplicate);

    auto mismatch = example2(snippets[0], "B");
    mismatch.snippet_id = "s3";
    CHECK(store.submit(mismatch).status == SubmitStatus::Mismatch);
    auto unknown = example2(snippets[0], "B");
    unknown.snippet_id = "nope";
    CHECK(store.submit(unknown).status == SubmitStatus::UnknownSnippet);

    auto all = store.annotations();
    REQUIRE(all.size() == 2);
    CHECK_FALSE(all[0].submitted_at.empty());
    CHECK(store.progress().at("A").discarded == 1);
    CHECK(store.stats().attempts == 1);
}

TEST_CASE("store contents are the replay of the logs")
{
    fixtures::TempDir dir("replay");
    auto snippets = four_snippets();
    std::vector<SnippetAnnotation> before;
    std::vector<Adjudication> adj_before;
    {
        AnnotationStore store(snippets, dir.path());
        std::mt19937_64 rng(97);
        for (const auto& s : snippets)
            for (const char* who : {"A", "B"})
                REQUIRE(store.submit(fixtures::random_valid(s, who, rng)).accepted());
        auto d = store.discrepancies();
        for (const auto& item : d.items) {
            if (item.aspect == "discard")
                continue;
            Adjudication adj{item.item_id, parse<Aspect>(item.aspect), item.label_a, "R", ""};
            REQUIRE(store.adjudicate(adj).accepted);
        }
        before = store.annotations();
        adj_before = store.adjudications();
    }
    // A write torn by a crash leaves an unterminated line behind.
    {
        std::ofstream log(dir.path() / AnnotationStore::kAnnotationLog, std::ios::app);
        log << R"({"snippet_id":"s1","annotator_id":"Z","disc)";
    }
    AnnotationStore again(snippets, dir.path());
    CHECK(again.ignored_partial_lines() == 1);
    CHECK(again.annotations() == before);
    REQUIRE(again.adjudications().size() == adj_before.size());
    CHECK(again.export_gold().gold.size() == 4);
    CHECK(again.export_gold().unresolved.empty());

    // The fragment is gone, so later appends stay well-formed.
    REQUIRE(again.submit(fixtures::discard(snippets[0], "C")).status == SubmitStatus::QuotaFull);
    auto training = fixtures::discard(snippets[0], "C");
    again.set_phase(Phase::Training);
    REQUIRE(again.submit(training).accepted());
    AnnotationStore third(snippets, dir.path());
    CHECK(third.ignored_partial_lines() == 0);
    CHECK(third.phase() == Phase::Training);
    CHECK(third.annotations().size() == before.size() + 1);
    CHECK(third.export_gold().gold.size() == 4);
}

TEST_CASE("corrupt log records are refused on load")
{
    fixtures::TempDir dir("corrupt");
    auto snippets = four_snippets();
    {
        std::ofstream log(dir.path() / AnnotationStore::kAnnotationLog);
        log << R"({"snippet_id":"s2","annotator_id":"A","discarded":false,"attempt":{"intention":"NoTrolling","disclosure":"Hidden"},"responses":[{"response_id":"s2r0","interpretation":"NoTrolling","strategy":"Normal"}]})"
            << "\n";
    }
    CHECK_THROWS_AS(AnnotationStore(snippets, dir.path()), InputError);
}

TEST_CASE("fuzz: acceptance iff no violations")
{
    fixtures::TempDir dir("fuzz");
    std::vector<Snippet> snippets;
    for (int i = 0; i < 40; ++i)
        snippets.push_back(fixtures::snippet("f" + std::to_string(i), 1 + i % 3));
    AnnotationStore store(snippets, dir.path(), AssignmentPolicy{1000});
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 600; ++trial) {
        const auto& s = snippets[rng() % snippets.size()];
        std::string who = "u" + std::to_string(rng() % 1000000);
        std::vector<ResponsePair> pairs;
        for (std::size_t j = 0; j < s.responses.size(); ++j)
            pairs.push_back({static_cast<Interpretation>(rng() % 3), static_cast<Strategy>(rng() % 7)});
        auto i = static_cast<Intention>(rng() % 3);
        auto d = static_cast<Disclosure>(rng() % 3);
        auto a = fixtures::annotation(s, who, i, d, pairs);
        auto expected = validate_combination(i, d, std::span<const ResponsePair>(pairs));
        auto res = store.submit(a);
        if (res.status == SubmitStatus::QuotaFull || res.status == SubmitStatus::Duplicate)
            continue;
        CHECK(res.accepted() == expected.empty());
        CHECK(res.violations == expected);
    }
    std::map<std::string, std::set<std::string>> seen;
    for (const auto& a : store.annotations()) {
        CHECK(check_annotation(a).ok());
        seen[a.snippet_id].insert(a.annotator_id);
    }
    for (const auto& [id, who] : seen)
        CHECK(who.size() <= 2);
}

TEST_CASE("adjudication rules and gold export")
{
    fixtures::TempDir dir("adjudicate");
    auto snippets = four_snippets();
    AnnotationStore store(snippets, dir.path());
    auto a = example2(snippets[0], "A");
    auto b = example2(snippets[0], "B");
    b.responses[1].strategy = Strategy::Engage;
    REQUIRE(store.submit(a).accepted());
    REQUIRE(store.submit(b).accepted());

    CHECK(store.export_gold().unresolved == std::vector<std::string>{"s1"});
    const std::string item = response_item_key("s1", "s1r1");
    CHECK_FALSE(store.adjudicate({"s1", Aspect::I, "Trolling", "R", ""}).accepted); // already agreed
    CHECK_FALSE(store.adjudicate({item, Aspect::B, "Sideways", "R", ""}).accepted);
    CHECK_FALSE(store.adjudicate({item, Aspect::B, "Troll", "", ""}).accepted);
    CHECK(store.adjudicate({item, Aspect::B, "Troll", "R", ""}).accepted);

    auto gold = store.export_gold();
    CHECK(gold.unresolved.empty());
    REQUIRE(gold.gold.size() == 1);
    CHECK(gold.gold[0].responses[1].strategy == Strategy::Troll);
}

TEST_CASE("HTTP endpoints")
{
    fixtures::TempDir dir("http");
    auto snippets = four_snippets();
    AnnotationStore store(snippets, dir.path(), AssignmentPolicy{2});
    LiveServer live(store);
    auto cli = live.client();

    SUBCASE("schema")
    {
        auto r = cli.Get("/api/schema");
        REQUIRE(r);
        CHECK(r->status == 200);
        auto j = json::parse(r->body);
        CHECK(j["aspects"].size() == 4);
        CHECK(j["constraints"].size() == 3);
        CHECK(j == json::parse(schema_json().dump()));
    }
    SUBCASE("annotation round trip")
    {
        auto next = cli.Get("/api/snippets/next?annotator=A");
        REQUIRE(next);
        auto nj = json::parse(next->body);
        CHECK(nj["done"] == false);
        CHECK(nj["snippet"]["snippet_id"] == "s1");
        CHECK(cli.Get("/api/snippets/next")->status == 400);

        auto ok = cli.Post("/api/annotations", to_json(example2(snippets[0], "A")).dump(), "application/json");
        REQUIRE(ok);
        CHECK(ok->status == 201);
        CHECK(json::parse(ok->body)["status"] == "accepted");

        auto bad = fixtures::annotation(snippets[1], "A", Intention::NoTrolling, Disclosure::Hidden,
                                        {{Interpretation::NoTrolling, Strategy::Normal}});
        auto rej = cli.Post("/api/annotations", to_json(bad).dump(), "application/json");
        REQUIRE(rej);
        CHECK(rej->status == 422);
        auto rj = json::parse(rej->body);
        CHECK(rj["violations"] == json::array({"B"}));
        CHECK(rj["status"] == "violation");

        auto dup = cli.Post("/api/annotations", to_json(example2(snippets[0], "A")).dump(), "application/json");
        CHECK(dup->status == 422);
        CHECK(json::parse(dup->body)["status"] == "duplicate");

        CHECK(cli.Post("/api/annotations", "not json", "application/json")->status == 400);

        auto disc = cli.Post("/api/annotations", to_json(fixtures::discard(snippets[1], "A")).dump(),
                             "application/json");
        CHECK(disc->status == 201);
        CHECK(json::parse(cli.Get("/api/snippets/next?annotator=A")->body)["snippet"]["snippet_id"] == "s3");
    }
    SUBCASE("agreement, discrepancies, adjudication, stats, export")
    {
        auto b = example2(snippets[0], "B");
        b.responses[1].strategy = Strategy::Engage;
        REQUIRE(store.submit(example2(snippets[0], "A")).accepted());
        REQUIRE(store.submit(b).accepted());

        auto ag = json::parse(cli.Get("/api/agreement?a=A&b=B")->body);
        CHECK(ag["annotators"] == json::array({"A", "B"}));
        REQUIRE(ag["rows"].size() == 4);
        CHECK(ag["rows"][0]["n"] == 1);
        CHECK(ag["rows"][3]["n"] == 2);
        CHECK(ag["weighting"] == "none");
        CHECK(json::parse(cli.Get("/api/agreement?weighted=linear")->body)["weighting"] == "linear");

        auto dj = json::parse(cli.Get("/api/discrepancies")->body);
        REQUIRE(dj["items"].size() == 1);
        CHECK(dj["items"][0]["aspect"] == "B");
        const std::string item = dj["items"][0]["item_id"];

        auto no = cli.Post("/api/adjudications",
                           json{{"item_id", "s1"}, {"aspect", "I"}, {"label", "Trolling"}, {"resolver_id", "R"}}.dump(),
                           "application/json");
        CHECK(no->status == 422);
        CHECK(json::parse(no->body)["status"] == "rejected");

        auto yes = cli.Post("/api/adjudications",
                            json{{"item_id", item}, {"aspect", "B"}, {"label", "Troll"}, {"resolver_id", "R"}}.dump(),
                            "application/json");
        CHECK(yes->status == 201);

        auto gold = json::parse(cli.Get("/api/export/gold")->body);
        REQUIRE(gold["gold"].size() == 1);
        CHECK(gold["gold"][0]["responses"][1]["strategy"] == "Troll");
        CHECK(gold["unresolved"].empty());

        auto st = json::parse(cli.Get("/api/stats")->body);
        CHECK(st["phase"] == "production");
        CHECK(st["snippets"] == 4);
        CHECK(st["snippets_doubly_annotated"] == 1);
        CHECK(st["gold"]["attempts"] == 1);
    }
    SUBCASE("phase switch")
    {
        CHECK(json::parse(cli.Get("/api/phase")->body)["phase"] == "production");
        auto r = cli.Post("/api/phase", R"({"phase":"training"})", "application/json");
        CHECK(r->status == 200);
        CHECK(store.phase() == Phase::Training);
        CHECK(cli.Post("/api/phase", R"({"phase":"nap"})", "application/json")->status == 400);
        REQUIRE(store.submit(example2(snippets[0], "A")).accepted());
        CHECK(store.annotations()[0].phase == Phase::Training);
        CHECK(store.export_gold().gold.empty());
    }
}

TEST_CASE("concurrent submitters never exceed the target")
{
    fixtures::TempDir dir("concurrent");
    std::vector<Snippet> snippets;
    for (int i = 0; i < 12; ++i)
        snippets.push_back(fixtures::snippet("c" + std::to_string(i), 1));
    AnnotationStore store(snippets, dir.path(), AssignmentPolicy{6});
    std::vector<std::thread> workers;
    for (int w = 0; w < 4; ++w)
        workers.emplace_back([&, w] {
            std::mt19937_64 rng(200 + w);
            std::string me = "w" + std::to_string(w);
            while (auto s = store.next_snippet(me))
                store.submit(fixtures::random_valid(*s, me, rng));
        });
    for (auto& t : workers)
        t.join();
    auto cov = store.coverage();
    for (std::size_t i = 0; i < snippets.size(); ++i) {
        auto& who = cov[snippets[i].snippet_id];
        CHECK(who.size() == store.policy().target(i));
    }
}
