#pragma once

// Four-aspect label space, logical constraints, annotation records and
// label-distribution statistics.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trollkit/errors.hpp"

namespace trollkit {

struct Snippet;

enum class Intention { Trolling, Playing, NoTrolling };
enum class Disclosure { Exposed, Hidden, None };
enum class Interpretation { Trolling, Playing, NoTrolling };
enum class Strategy { Engage, Praise, Troll, Follow, Frustrate, Neutralize, Normal };

// I and D describe the attempt; R and B describe each response.
enum class Aspect { I, D, R, B };
inline constexpr std::array<Aspect, 4> kAspects{Aspect::I, Aspect::D, Aspect::R, Aspect::B};

enum class Violation { A, B, C };

template <typename E>
struct EnumNames;

template <>
struct EnumNames<Intention> {
    static constexpr std::array<std::string_view, 3> names{"Trolling", "Playing", "NoTrolling"};
};
template <>
struct EnumNames<Disclosure> {
    static constexpr std::array<std::string_view, 3> names{"Exposed", "Hidden", "None"};
};
template <>
struct EnumNames<Interpretation> {
    static constexpr std::array<std::string_view, 3> names{"Trolling", "Playing", "NoTrolling"};
};
template <>
struct EnumNames<Strategy> {
    static constexpr std::array<std::string_view, 7> names{"Engage",    "Praise",     "Troll", "Follow",
                                                          "Frustrate", "Neutralize", "Normal"};
};
template <>
struct EnumNames<Aspect> {
    static constexpr std::array<std::string_view, 4> names{"I", "D", "R", "B"};
};
template <>
struct EnumNames<Violation> {
    static constexpr std::array<std::string_view, 3> names{"A", "B", "C"};
};

template <typename E>
constexpr std::size_t enum_size = EnumNames<E>::names.size();

template <typename E>
constexpr std::string_view name(E value)
{
    return EnumNames<E>::names[static_cast<std::size_t>(value)];
}

template <typename E>
constexpr auto all_values()
{
    std::array<E, enum_size<E>> out{};
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<E>(i);
    return out;
}

template <typename E>
std::optional<E> try_parse(std::string_view text)
{
    const auto& names = EnumNames<E>::names;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == text)
            return static_cast<E>(i);
    return std::nullopt;
}

template <typename E>
E parse(std::string_view text)
{
    if (auto v = try_parse<E>(text))
        return *v;
    throw InputError("unknown class name '" + std::string(text) + "'");
}

// Display label, e.g. "Mock Trolling or Playing"; wire names stay the enum tokens.
std::string_view display_name(Intention v);
std::string_view display_name(Interpretation v);

// Class names of an aspect in enum order.
std::vector<std::string> class_names(Aspect aspect);
// Whole aspect name for reports, e.g. "B: Response Strategy".
std::string_view aspect_title(Aspect aspect);
bool is_attempt_aspect(Aspect aspect);

struct AttemptLabel {
    Intention intention = Intention::NoTrolling;
    Disclosure disclosure = Disclosure::None;
    bool operator==(const AttemptLabel&) const = default;
};

struct ResponseLabel {
    std::string response_id;
    Interpretation interpretation = Interpretation::NoTrolling;
    Strategy strategy = Strategy::Normal;
    bool operator==(const ResponseLabel&) const = default;
};

struct ResponsePair {
    Interpretation interpretation;
    Strategy strategy;
};

// A: Trolling/Playing intention needs Hidden or Exposed disclosure.
// B: NoTrolling intention needs None disclosure.
// C: Trolling/Playing interpretation forbids the Normal strategy.
// Each violated constraint is listed once, in A, B, C order.
std::vector<Violation> validate_combination(Intention i, Disclosure d, std::span<const ResponsePair> pairs);
std::vector<Violation> validate_combination(Intention i, Disclosure d, std::span<const ResponseLabel> responses);

bool attempt_pair_valid(Intention i, Disclosure d);
bool response_pair_valid(Interpretation r, Strategy b);

// Number of full (I, D, (R, B)^n) assignments with no violations.
// Throws InputError if the count overflows 64 bits.
std::uint64_t enumerate_valid(unsigned n_responses);

// Machine-readable form of constraints A, B, C: when `if_aspect` takes a value
// in `if_in`, `then_aspect` must take a value in `then_allowed`.
struct ConstraintRule {
    Violation id = Violation::A;
    Aspect if_aspect = Aspect::I;
    std::vector<std::string> if_in;
    Aspect then_aspect = Aspect::D;
    std::vector<std::string> then_allowed;
    std::string text;
};

const std::vector<ConstraintRule>& constraint_table();
// Aspects, classes, display names and the constraint table, as served to clients.
nlohmann::ordered_json schema_json();

enum class Phase { Training, Production };

struct SnippetAnnotation {
    std::string snippet_id;
    std::string annotator_id;
    bool discarded = false;
    std::optional<AttemptLabel> attempt;   // absent iff discarded
    std::vector<ResponseLabel> responses;  // empty iff discarded
    std::string submitted_at;              // ISO-8601
    Phase phase = Phase::Production;

    bool operator==(const SnippetAnnotation&) const = default;
};

// Item keys used for per-response bookkeeping: "<snippet>/<response>".
std::string response_item_key(std::string_view snippet_id, std::string_view response_id);

struct AnnotationCheck {
    std::vector<Violation> violations;
    std::string problem; // structural issue (shape, id mismatch); empty when none
    bool ok() const { return violations.empty() && problem.empty(); }
};

// Shape rules + constraint check. With a snippet, the response ids must match
// its responses exactly and in order.
AnnotationCheck check_annotation(const SnippetAnnotation& a, const Snippet* snippet = nullptr);

nlohmann::ordered_json to_json(const SnippetAnnotation& a);
SnippetAnnotation annotation_from_json(const nlohmann::json& j);

// Reads one annotation per line. Any record failing check_annotation is an error.
std::vector<SnippetAnnotation> read_annotations(std::istream& in);
std::vector<SnippetAnnotation> read_annotations_file(const std::filesystem::path& path);
void write_annotations(std::ostream& out, const std::vector<SnippetAnnotation>& annotations);

// --- adjudication + gold -------------------------------------------------

struct Adjudication {
    std::string item_id; // snippet id for I/D, response_item_key for R/B
    Aspect aspect = Aspect::I;
    std::string label;
    std::string resolver_id;
    std::string submitted_at;
};

nlohmann::ordered_json to_json(const Adjudication& a);
Adjudication adjudication_from_json(const nlohmann::json& j);

struct GoldExport {
    std::vector<SnippetAnnotation> gold; // annotator_id "gold", snippet order of first appearance
    std::vector<std::string> unresolved; // snippets with open disagreements
};

// Picks one production annotation per snippet. Where two non-discarded
// annotations disagree the adjudicated label wins; unresolved or
// constraint-breaking merges are left out and listed.
GoldExport export_gold(const std::vector<SnippetAnnotation>& annotations,
                       const std::vector<Adjudication>& adjudications);

// --- distribution --------------------------------------------------------

struct ClassCount {
    std::string label;
    std::size_t count = 0;
    double percent = 0.0;
};

struct Distribution {
    std::array<std::vector<ClassCount>, 4> per_aspect; // indexed by Aspect; observed classes only
    std::size_t attempts = 0;
    std::size_t responses = 0;

    const std::vector<ClassCount>& operator[](Aspect a) const { return per_aspect[static_cast<std::size_t>(a)]; }
};

// Discarded and training-phase annotations are skipped.
Distribution distribution(std::span<const SnippetAnnotation> annotations);
nlohmann::ordered_json to_json(const Distribution& d);

} // namespace trollkit
