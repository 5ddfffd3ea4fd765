#pragma once

// Annotation backend: an append-only store with snippet assignment, and the
// HTTP+JSON layer over it.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "trollkit/agreement.hpp"
#include "trollkit/corpus.hpp"
#include "trollkit/schema.hpp"

namespace httplib {
class Server;
}

namespace trollkit {

// The first double_quota snippets (in file order) want two distinct
// annotators, the rest one. Discards count toward the quota.
struct AssignmentPolicy {
    std::size_t double_quota = 100;
    std::size_t target(std::size_t snippet_position) const { return snippet_position < double_quota ? 2 : 1; }
};

enum class SubmitStatus { Accepted, Violation, Duplicate, Mismatch, UnknownSnippet, QuotaFull, Malformed };
std::string_view status_name(SubmitStatus s);

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Accepted;
    std::vector<Violation> violations;
    std::string message;
    bool accepted() const { return status == SubmitStatus::Accepted; }
};

struct AdjudicateResult {
    bool accepted = false;
    std::string message;
};

struct AnnotatorProgress {
    std::size_t annotated = 0;
    std::size_t discarded = 0;
};

class AnnotationStore {
public:
    static constexpr const char* kAnnotationLog = "annotations.jsonl";
    static constexpr const char* kAdjudicationLog = "adjudications.jsonl";
    static constexpr const char* kPhaseFile = "phase";

    // Creates dir if needed, then replays both logs. A log record that fails
    // validation throws InputError; an unterminated final line from an
    // interrupted write is ignored and counted.
    AnnotationStore(std::vector<Snippet> snippets, std::filesystem::path dir, AssignmentPolicy policy = {});
    ~AnnotationStore();
    AnnotationStore(const AnnotationStore&) = delete;
    AnnotationStore& operator=(const AnnotationStore&) = delete;

    std::optional<Snippet> next_snippet(const std::string& annotator_id) const;
    // Appends and fsyncs before returning Accepted. Empty submitted_at is
    // filled with the current UTC time; phase is stamped from the store.
    SubmitResult submit(SnippetAnnotation annotation);
    AdjudicateResult adjudicate(Adjudication adjudication);

    // Without an explicit pair the busiest pair is used.
    AgreementReport agreement(const std::optional<AnnotatorPair>& who = std::nullopt, bool linear_weighted = false,
                              AnnotatorPair* used = nullptr) const;
    DiscrepancyList discrepancies(const std::optional<AnnotatorPair>& who = std::nullopt,
                                  AnnotatorPair* used = nullptr) const;
    Distribution stats() const;
    GoldExport export_gold() const;

    Phase phase() const;
    void set_phase(Phase p);

    std::vector<SnippetAnnotation> annotations() const;
    std::vector<Adjudication> adjudications() const;
    std::map<std::string, AnnotatorProgress> progress() const;
    // Distinct production annotators per snippet id.
    std::map<std::string, std::set<std::string>> coverage() const;
    std::size_t snippet_count() const { return snippets_.size(); }
    std::size_t ignored_partial_lines() const { return ignored_partial_; }
    const AssignmentPolicy& policy() const { return policy_; }

private:
    void replay();
    void append_line(int fd, const std::string& line);
    bool owes(std::size_t position, const std::string& annotator, Phase phase) const;

    std::vector<Snippet> snippets_;
    std::map<std::string, std::size_t> position_;
    std::filesystem::path dir_;
    AssignmentPolicy policy_;
    Phase phase_ = Phase::Production;

    mutable std::shared_mutex mutex_;
    std::vector<SnippetAnnotation> annotations_;
    std::vector<Adjudication> adjudications_;
    // (snippet id, phase) -> annotators
    std::map<std::pair<std::string, Phase>, std::set<std::string>> annotators_;
    std::size_t ignored_partial_ = 0;
    int annotation_fd_ = -1;
    int adjudication_fd_ = -1;
};

struct ServerOptions {
    std::optional<std::filesystem::path> static_dir;
};

// Registers every /api route on server.
void install_routes(httplib::Server& server, AnnotationStore& store, const ServerOptions& options = {});

// JSON bodies shared by the routes and the tests.
nlohmann::ordered_json agreement_json(const AgreementReport& report, const AnnotatorPair& who);
nlohmann::ordered_json discrepancies_json(const DiscrepancyList& list, const AnnotatorPair& who);
nlohmann::ordered_json stats_json(const AnnotationStore& store);

} // namespace trollkit
