#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "trollkit/schema.hpp"

using namespace trollkit;

namespace {

// Oracle written straight from the constraint text.
bool oracle_attempt(Intention i, Disclosure d)
{
    bool trolling_like = i == Intention::Trolling || i == Intention::Playing;
    if (trolling_like)
        return d == Disclosure::Hidden || d == Disclosure::Exposed;
    return d == Disclosure::None;
}

bool oracle_response(Interpretation r, Strategy b)
{
    return !(r != Interpretation::NoTrolling && b == Strategy::Normal);
}

// Walks every (I, D, (R, B)^n) tuple and judges it with the oracles.
std::uint64_t brute_force(unsigned n)
{
    std::uint64_t valid = 0;
    std::vector<std::size_t> digits(n, 0);
    for (auto i : all_values<Intention>())
        for (auto d : all_values<Disclosure>()) {
            std::fill(digits.begin(), digits.end(), 0);
            while (true) {
                bool ok = oracle_attempt(i, d);
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

std::vector<Violation> check(Intention i, Disclosure d, std::vector<ResponsePair> pairs)
{
    return validate_combination(i, d, std::span<const ResponsePair>(pairs));
}

} // namespace

TEST_CASE("validate_combination examples")
{
    using V = std::vector<Violation>;
    CHECK(check(Intention::Trolling, Disclosure::Exposed, {{Interpretation::Trolling, Strategy::Frustrate}}) == V{});
    CHECK(check(Intention::NoTrolling, Disclosure::Exposed, {}) == V{Violation::B});
    CHECK(check(Intention::Playing, Disclosure::Hidden, {{Interpretation::Playing, Strategy::Normal}}) ==
          V{Violation::C});
    CHECK(check(Intention::Trolling, Disclosure::None,
                {{Interpretation::Trolling, Strategy::Normal}, {Interpretation::Playing, Strategy::Normal}}) ==
          V{Violation::A, Violation::C});
}

TEST_CASE("pair validity counts")
{
    int attempt_ok = 0, response_ok = 0;
    for (auto i : all_values<Intention>())
        for (auto d : all_values<Disclosure>()) {
            CHECK(attempt_pair_valid(i, d) == oracle_attempt(i, d));
            CHECK(check(i, d, {}).empty() == oracle_attempt(i, d));
            attempt_ok += attempt_pair_valid(i, d);
        }
    for (auto r : all_values<Interpretation>())
        for (auto b : all_values<Strategy>()) {
            CHECK(response_pair_valid(r, b) == oracle_response(r, b));
            response_ok += response_pair_valid(r, b);
        }
    CHECK(attempt_ok == 5);
    CHECK(response_ok == 19);
}

TEST_CASE("enumerate_valid matches brute force")
{
    std::uint64_t expected = 5;
    for (unsigned n = 0; n <= 4; ++n) {
        CHECK(enumerate_valid(n) == expected);
        if (n <= 3)
            CHECK(brute_force(n) == expected);
        expected *= 19;
    }
    CHECK(enumerate_valid(1) == 95);
    CHECK(enumerate_valid(2) == 1805);
    CHECK_THROWS_AS(enumerate_valid(100), InputError);
}

TEST_CASE("constraint table agrees with validate_combination")
{
    const auto& rules = constraint_table();
    REQUIRE(rules.size() == 3);
    auto in = [](const std::vector<std::string>& v, std::string_view x) {
        return std::find(v.begin(), v.end(), x) != v.end();
    };
    std::size_t combos = 0;
    for (auto i : all_values<Intention>())
        for (auto d : all_values<Disclosure>())
            for (auto r : all_values<Interpretation>())
                for (auto b : all_values<Strategy>()) {
                    ++combos;
                    std::vector<Violation> from_table;
                    for (const auto& rule : rules) {
                        auto value = [&](Aspect a) -> std::string_view {
                            switch (a) {
                            case Aspect::I: return name(i);
                            case Aspect::D: return name(d);
                            case Aspect::R: return name(r);
                            default: return name(b);
                            }
                        };
                        if (in(rule.if_in, value(rule.if_aspect)) && !in(rule.then_allowed, value(rule.then_aspect)))
                            from_table.push_back(rule.id);
                    }
                    CHECK(from_table == check(i, d, {{r, b}}));
                }
    CHECK(combos == 189);
}

TEST_CASE("schema_json shape")
{
    auto j = schema_json();
    REQUIRE(j["aspects"].size() == 4);
    CHECK(j["aspects"][0]["id"] == "I");
    CHECK(j["aspects"][3]["classes"].size() == 7);
    REQUIRE(j["constraints"].size() == 3);
    CHECK(j["constraints"][2]["id"] == "C");
    CHECK(j["constraints"][2]["if"]["aspect"] == "R");
    bool has_display = false;
    for (const auto& c : j["aspects"][0]["classes"])
        has_display = has_display || c["display"] == "Mock Trolling or Playing";
    CHECK(has_display);
}

TEST_CASE("names round-trip")
{
    for (auto v : all_values<Strategy>())
        CHECK(parse<Strategy>(name(v)) == v);
    CHECK_FALSE(try_parse<Intention>("Mock Trolling"));
    CHECK_THROWS_AS(parse<Disclosure>("none"), InputError);
    CHECK(aspect_title(Aspect::B) == "B: Response Strategy");
    CHECK(class_names(Aspect::R) == std::vector<std::string>{"Trolling", "Playing", "NoTrolling"});
}

TEST_CASE("check_annotation shape rules")
{
    auto s = fixtures::snippet("s1", 2);
    auto a = fixtures::annotation(s, "a1", Intention::Trolling, Disclosure::Exposed,
                                  {{Interpretation::Trolling, Strategy::Frustrate},
                                   {Interpretation::Trolling, Strategy::Troll}});
    CHECK(check_annotation(a, &s).ok());

    auto swapped = a;
    std::swap(swapped.responses[0], swapped.responses[1]);
    CHECK_FALSE(check_annotation(swapped, &s).problem.empty());

    auto missing = a;
    missing.responses.pop_back();
    CHECK_FALSE(check_annotation(missing, &s).ok());

    auto bad = a;
    bad.attempt->disclosure = Disclosure::None;
    auto c = check_annotation(bad, &s);
    CHECK(c.violations == std::vector<Violation>{Violation::A});
    CHECK(c.problem.empty());

    auto d = fixtures::discard(s, "a1");
    CHECK(check_annotation(d, &s).ok());
    d.attempt = AttemptLabel{};
    CHECK_FALSE(check_annotation(d, &s).ok());
}

TEST_CASE("annotation file round-trip and loader rejection")
{
    auto s = fixtures::snippet("s1", 1);
    std::vector<SnippetAnnotation> list{
        fixtures::annotation(s, "a1", Intention::Playing, Disclosure::Hidden,
                             {{Interpretation::Playing, Strategy::Praise}}),
        fixtures::discard(s, "a2")};
    list[1].phase = Phase::Training;
    std::ostringstream out;
    write_annotations(out, list);
    std::istringstream in(out.str());
    CHECK(read_annotations(in) == list);

    std::istringstream invalid(
        R"({"snippet_id":"s1","annotator_id":"a","discarded":false,"attempt":{"intention":"NoTrolling","disclosure":"Hidden"},"responses":[{"response_id":"s1r0","interpretation":"NoTrolling","strategy":"Normal"}]})");
    CHECK_THROWS_AS(read_annotations(invalid), InputError);

    std::istringstream unknown(
        R"({"snippet_id":"s1","annotator_id":"a","attempt":{"intention":"Mock","disclosure":"None"},"responses":[]})");
    CHECK_THROWS_AS(read_annotations(unknown), InputError);

    std::istringstream not_json("{oops\n");
    CHECK_THROWS_AS(read_annotations(not_json), InputError);
}

TEST_CASE("distribution")
{
    auto s = fixtures::snippet("s1", 1);
    auto one = fixtures::annotation(s, "a1", Intention::Trolling, Disclosure::Hidden,
                                    {{Interpretation::Playing, Strategy::Praise}});
    std::vector<SnippetAnnotation> list{one};
    auto d = distribution(list);
    for (auto aspect : kAspects) {
        REQUIRE(d[aspect].size() == 1);
        CHECK(d[aspect][0].percent == doctest::Approx(100.0));
    }

    auto s2 = fixtures::snippet("s2", 3);
    list.push_back(fixtures::annotation(s2, "a1", Intention::NoTrolling, Disclosure::None,
                                        {{Interpretation::Trolling, Strategy::Troll},
                                         {Interpretation::NoTrolling, Strategy::Normal},
                                         {Interpretation::Trolling, Strategy::Frustrate}}));
    list.push_back(fixtures::discard(s2, "a2"));
    auto training = one;
    training.phase = Phase::Training;
    list.push_back(training);

    d = distribution(list);
    CHECK(d.attempts == 2);
    CHECK(d.responses == 4);
    std::size_t r_total = 0, b_total = 0;
    for (const auto& c : d[Aspect::R])
        r_total += c.count;
    for (const auto& c : d[Aspect::B])
        b_total += c.count;
    CHECK(r_total == b_total);
    CHECK(r_total == d.responses);
    REQUIRE(d[Aspect::R].size() == 3);
    CHECK(d[Aspect::R][0].label == "Trolling");
    CHECK(d[Aspect::R][0].count == 2);
    CHECK(d[Aspect::R][0].percent == doctest::Approx(50.0));
}

TEST_CASE("gold export prefers adjudications")
{
    auto s = fixtures::snippet("s1", 1);
    auto a = fixtures::annotation(s, "a1", Intention::Trolling, Disclosure::Exposed,
                                  {{Interpretation::Trolling, Strategy::Engage}});
    auto b = fixtures::annotation(s, "a2", Intention::Trolling, Disclosure::Exposed,
                                  {{Interpretation::Trolling, Strategy::Troll}});
    auto s2 = fixtures::snippet("s2", 1);
    auto c = fixtures::annotation(s2, "a1", Intention::NoTrolling, Disclosure::None,
                                  {{Interpretation::NoTrolling, Strategy::Normal}});

    auto open = export_gold({a, b, c}, {});
    CHECK(open.unresolved == std::vector<std::string>{"s1"});
    REQUIRE(open.gold.size() == 1);
    CHECK(open.gold[0].snippet_id == "s2");
    CHECK(open.gold[0].annotator_id == "gold");

    Adjudication adj{response_item_key("s1", "s1r0"), Aspect::B, "Troll", "boss", ""};
    auto closed = export_gold({a, b, c}, {adj});
    CHECK(closed.unresolved.empty());
    REQUIRE(closed.gold.size() == 2);
    CHECK(closed.gold[0].responses[0].strategy == Strategy::Troll);

    CHECK_THROWS_AS(adjudication_from_json(nlohmann::json{{"item_id", "s1"}, {"aspect", "I"}, {"label", "Troll"}}),
                    InputError);
}
