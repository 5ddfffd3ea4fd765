#pragma once

// Feature groups over (snippet, task) instances, the key -> column
// vocabulary, and the vectorized dataset file.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trollkit/corpus.hpp"
#include "trollkit/linguistics.hpp"
#include "trollkit/schema.hpp"

namespace trollkit {

enum class FeatureGroup { ngr, pol, emt, hrm, syn, swr, usr, frm, cue, glv };

inline constexpr std::array<FeatureGroup, 10> kAllGroups{
    FeatureGroup::ngr, FeatureGroup::pol, FeatureGroup::emt, FeatureGroup::hrm, FeatureGroup::syn,
    FeatureGroup::swr, FeatureGroup::usr, FeatureGroup::frm, FeatureGroup::cue, FeatureGroup::glv};

// Column order of the published results table.
inline constexpr std::array<FeatureGroup, 10> kReportGroupOrder{
    FeatureGroup::emt, FeatureGroup::hrm, FeatureGroup::syn, FeatureGroup::swr, FeatureGroup::usr,
    FeatureGroup::frm, FeatureGroup::cue, FeatureGroup::pol, FeatureGroup::ngr, FeatureGroup::glv};

using GroupSet = std::set<FeatureGroup>;

std::string_view group_name(FeatureGroup g);
FeatureGroup parse_group(std::string_view name);
GroupSet parse_groups(std::string_view comma_list); // "all" selects every group
std::string format_groups(const GroupSet& groups);

struct FeatureKey {
    FeatureGroup group = FeatureGroup::ngr;
    std::string name;
    auto operator<=>(const FeatureKey&) const = default;
};

class FeatureSpace {
public:
    explicit FeatureSpace(std::size_t dense_width = 0) : dense_width_(dense_width) {}

    std::optional<std::uint32_t> find(const FeatureKey& key) const;
    // Adds unknown keys while unfrozen; a frozen space returns nullopt for them.
    std::optional<std::uint32_t> intern(const FeatureKey& key);
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }

    std::size_t sparse_size() const { return keys_.size(); }
    std::size_t dense_offset() const { return keys_.size(); }
    std::size_t dense_width() const { return dense_width_; }
    std::size_t width() const { return keys_.size() + dense_width_; }

    const std::vector<FeatureKey>& keys() const { return keys_; }
    // "ngr:w:stupid", "pol:compound", "glv:17"
    std::string column_name(std::size_t column) const;

private:
    static std::string composite(const FeatureKey& key);

    std::vector<FeatureKey> keys_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::size_t dense_width_ = 0;
    bool frozen_ = false;
};

struct FeatureVector {
    std::vector<std::pair<std::uint32_t, double>> sparse; // ascending index, no duplicates
    std::vector<double> dense;
};

// Tasks I and D read the attempt; R and B read the addressed response.
struct FeatureOptions {
    bool with_parent = false;  // add context-comment features under a "ctx." prefix
    bool with_attempt = false; // R/B only: add attempt features under an "att." prefix
    std::size_t min_df = 1;    // keys must occur in at least this many training instances
};

struct Instance {
    std::size_t snippet = 0; // index into the corpus snippet list
    Aspect task = Aspect::I;
    std::optional<std::size_t> response; // set for R and B
    std::string label;
};

const Comment& source_comment(const Snippet& s, Aspect task, std::optional<std::size_t> response_index);

class Featurizer {
public:
    explicit Featurizer(const LinguisticResources& resources, FeatureOptions options = {});

    // Caches analyses for every comment in the snippets. Not thread-safe; call
    // before concurrent featurization.
    void prepare(std::span<const Snippet> snippets);

    FeatureVector featurize(const Snippet& s, Aspect task, std::optional<std::size_t> response_index,
                            FeatureSpace& space, const GroupSet& groups) const;
    // Lookup-only featurization against a frozen space.
    FeatureVector featurize(const Snippet& s, Aspect task, std::optional<std::size_t> response_index,
                            const FeatureSpace& space, const GroupSet& groups) const;

    // Keys observed over the training instances, then frozen. Throws InputError
    // when training is empty.
    FeatureSpace build_space(std::span<const Snippet> snippets, std::span<const Instance> training,
                             const GroupSet& groups) const;

    std::size_t dense_width(const GroupSet& groups) const;
    const LinguisticResources& resources() const { return *resources_; }
    const FeatureOptions& options() const { return options_; }

    struct CommentView {
        AnalyzedText text;
        SentimentScores sentiment;
        std::vector<double> embedding;
        bool emoticon = false, harmful = false, emotion = false, swear = false, politeness = false;
        bool swear_username = false;
    };
    CommentView view_of(const Comment& c) const;

private:
    template <typename Sink>
    void emit_comment(const Comment& c, std::string_view prefix, const GroupSet& groups, Sink& sink,
                      std::vector<double>* dense) const;
    template <typename Sink>
    void emit_instance(const Snippet& s, Aspect task, std::optional<std::size_t> response_index,
                       const GroupSet& groups, Sink& sink, std::vector<double>* dense) const;

    const LinguisticResources* resources_;
    FeatureOptions options_;
    std::unordered_map<std::string, std::shared_ptr<const CommentView>> cache_;
};

// Convenience wrapper: a fresh Featurizer per call.
FeatureVector featurize(const Snippet& s, Aspect task, std::optional<std::size_t> response_index, FeatureSpace& space,
                        const GroupSet& groups, const LinguisticResources& resources,
                        const FeatureOptions& options = {});

// --- vectorized dataset file ---------------------------------------------

struct VectorizedDataset {
    Aspect task = Aspect::I;
    GroupSet groups;
    std::size_t width = 0;
    std::size_t dense_offset = 0;
    std::size_t dense_width = 0;
    std::vector<std::string> classes;
    std::vector<std::string> labels;
    std::vector<FeatureVector> vectors;
};

// Header line (JSON) then one "label<TAB>i:v i:v<TAB>d1 d2 …" line per instance.
void write_vectors(std::ostream& out, const VectorizedDataset& data);
VectorizedDataset read_vectors(std::istream& in);

} // namespace trollkit
