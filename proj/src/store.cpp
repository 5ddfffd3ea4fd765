#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>

#include "trollkit/errors.hpp"
#include "trollkit/service.hpp"

namespace trollkit {

using nlohmann::json;

std::string_view status_name(SubmitStatus s)
{
    switch (s) {
    case SubmitStatus::Accepted: return "accepted";
    case SubmitStatus::Violation: return "violation";
    case SubmitStatus::Duplicate: return "duplicate";
    case SubmitStatus::Mismatch: return "mismatch";
    case SubmitStatus::UnknownSnippet: return "unknown-snippet";
    case SubmitStatus::QuotaFull: return "quota-full";
    case SubmitStatus::Malformed: return "malformed";
    }
    return "unknown";
}

namespace {

std::string utc_now()
{
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int open_log(const std::filesystem::path& path)
{
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0)
        throw IngestionError("cannot open log " + path.string() + ": " + std::strerror(errno));
    return fd;
}

// Complete lines; an unterminated trailing fragment is cut off the file.
std::vector<std::string> read_log(const std::filesystem::path& path, bool& partial_tail)
{
    partial_tail = false;
    std::vector<std::string> lines;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return lines;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t start = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        if (nl == std::string::npos) {
            partial_tail = true;
            in.close();
            std::filesystem::resize_file(path, start);
            break;
        }
        std::string line = content.substr(start, nl - start);
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            lines.push_back(std::move(line));
        start = nl + 1;
    }
    return lines;
}

std::string describe(const AnnotationCheck& check)
{
    std::string why = check.problem;
    for (auto v : check.violations)
        why += (why.empty() ? "violates " : ", ") + std::string(name(v));
    return why;
}

// Class label of one item on one aspect, or nullopt when not labeled.
std::optional<std::string> item_label(const SnippetAnnotation& a, const std::string& item_id, Aspect aspect)
{
    if (a.discarded || !a.attempt)
        return std::nullopt;
    if (is_attempt_aspect(aspect)) {
        if (item_id != a.snippet_id)
            return std::nullopt;
        return std::string(aspect == Aspect::I ? name(a.attempt->intention) : name(a.attempt->disclosure));
    }
    for (const auto& r : a.responses) {
        if (response_item_key(a.snippet_id, r.response_id) != item_id)
            continue;
        return std::string(aspect == Aspect::R ? name(r.interpretation) : name(r.strategy));
    }
    return std::nullopt;
}

} // namespace

AnnotationStore::AnnotationStore(std::vector<Snippet> snippets, std::filesystem::path dir, AssignmentPolicy policy)
    : snippets_(std::move(snippets)), dir_(std::move(dir)), policy_(policy)
{
    for (std::size_t i = 0; i < snippets_.size(); ++i)
        if (!position_.emplace(snippets_[i].snippet_id, i).second)
            throw InputError("duplicate snippet id " + snippets_[i].snippet_id);
    std::filesystem::create_directories(dir_);
    replay();
    annotation_fd_ = open_log(dir_ / kAnnotationLog);
    adjudication_fd_ = open_log(dir_ / kAdjudicationLog);
}

AnnotationStore::~AnnotationStore()
{
    if (annotation_fd_ >= 0)
        ::close(annotation_fd_);
    if (adjudication_fd_ >= 0)
        ::close(adjudication_fd_);
}

void AnnotationStore::replay()
{
    if (std::ifstream phase_in(dir_ / kPhaseFile); phase_in) {
        std::string p;
        phase_in >> p;
        if (p == "training")
            phase_ = Phase::Training;
        else if (p == "production" || p.empty())
            phase_ = Phase::Production;
        else
            throw InputError("store phase file holds '" + p + "'");
    }

    bool partial = false;
    std::size_t lineno = 0;
    for (const auto& line : read_log(dir_ / kAnnotationLog, partial)) {
        ++lineno;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("annotation log line " + std::to_string(lineno) + " is not JSON");
        SnippetAnnotation a = annotation_from_json(j);
        auto pos = position_.find(a.snippet_id);
        if (pos == position_.end())
            throw InputError("annotation log line " + std::to_string(lineno) + " names unknown snippet " +
                             a.snippet_id);
        auto check = check_annotation(a, &snippets_[pos->second]);
        if (!check.ok())
            throw InputError("annotation log line " + std::to_string(lineno) + " rejected: " + describe(check));
        if (!annotators_[{a.snippet_id, a.phase}].insert(a.annotator_id).second)
            throw InputError("annotation log line " + std::to_string(lineno) + " duplicates an earlier record");
        annotations_.push_back(std::move(a));
    }
    ignored_partial_ += partial;

    lineno = 0;
    for (const auto& line : read_log(dir_ / kAdjudicationLog, partial)) {
        ++lineno;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("adjudication log line " + std::to_string(lineno) + " is not JSON");
        adjudications_.push_back(adjudication_from_json(j));
    }
    ignored_partial_ += partial;
}

void AnnotationStore::append_line(int fd, const std::string& line)
{
    std::string data = line + '\n';
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            throw IngestionError(std::string("log write failed: ") + std::strerror(errno));
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0)
        throw IngestionError(std::string("log fsync failed: ") + std::strerror(errno));
}

bool AnnotationStore::owes(std::size_t position, const std::string& annotator, Phase phase) const
{
    auto it = annotators_.find({snippets_[position].snippet_id, phase});
    const std::size_t have = it == annotators_.end() ? 0 : it->second.size();
    if (it != annotators_.end() && it->second.count(annotator))
        return false;
    if (phase == Phase::Training)
        return true;
    return have < policy_.target(position);
}

std::optional<Snippet> AnnotationStore::next_snippet(const std::string& annotator_id) const
{
    std::shared_lock lock(mutex_);
    for (std::size_t i = 0; i < snippets_.size(); ++i)
        if (owes(i, annotator_id, phase_))
            return snippets_[i];
    return std::nullopt;
}

SubmitResult AnnotationStore::submit(SnippetAnnotation a)
{
    std::unique_lock lock(mutex_);
    SubmitResult res;
    auto pos = position_.find(a.snippet_id);
    if (pos == position_.end()) {
        res.status = SubmitStatus::UnknownSnippet;
        res.message = "no snippet with id '" + a.snippet_id + "'";
        return res;
    }
    a.phase = phase_;
    if (a.submitted_at.empty())
        a.submitted_at = utc_now();
    auto check = check_annotation(a, &snippets_[pos->second]);
    if (!check.problem.empty()) {
        res.status = check.problem.find("match") != std::string::npos ? SubmitStatus::Mismatch
                                                                        : SubmitStatus::Malformed;
        res.message = check.problem;
        return res;
    }
    if (!check.violations.empty()) {
        res.status = SubmitStatus::Violation;
        res.violations = check.violations;
        res.message = describe(check);
        return res;
    }
    auto& who = annotators_[{a.snippet_id, a.phase}];
    if (who.count(a.annotator_id)) {
        res.status = SubmitStatus::Duplicate;
        res.message = a.annotator_id + " already annotated " + a.snippet_id;
        return res;
    }
    if (a.phase == Phase::Production && who.size() >= policy_.target(pos->second)) {
        res.status = SubmitStatus::QuotaFull;
        res.message = a.snippet_id + " already has its " + std::to_string(policy_.target(pos->second)) +
                      " annotator(s)";
        return res;
    }
    append_line(annotation_fd_, to_json(a).dump());
    who.insert(a.annotator_id);
    annotations_.push_back(std::move(a));
    return res;
}

AdjudicateResult AnnotationStore::adjudicate(Adjudication adj)
{
    std::unique_lock lock(mutex_);
    AdjudicateResult res;
    const auto classes = class_names(adj.aspect);
    if (std::find(classes.begin(), classes.end(), adj.label) == classes.end()) {
        res.message = "'" + adj.label + "' is not a class of aspect " + std::string(name(adj.aspect));
        return res;
    }
    if (adj.resolver_id.empty()) {
        res.message = "missing resolver_id";
        return res;
    }
    const std::string snippet_id = adj.item_id.substr(0, adj.item_id.find('/'));
    std::set<std::string> labels;
    for (const auto& a : annotations_) {
        if (a.snippet_id != snippet_id || a.phase != Phase::Production)
            continue;
        if (auto l = item_label(a, adj.item_id, adj.aspect))
            labels.insert(*l);
    }
    if (labels.size() < 2) {
        res.message = "no recorded discrepancy on " + std::string(name(adj.aspect)) + " for item " + adj.item_id;
        return res;
    }
    if (adj.submitted_at.empty())
        adj.submitted_at = utc_now();
    append_line(adjudication_fd_, to_json(adj).dump());
    adjudications_.push_back(std::move(adj));
    res.accepted = true;
    return res;
}

AgreementReport AnnotationStore::agreement(const std::optional<AnnotatorPair>& who, bool linear_weighted,
                                           AnnotatorPair* used) const
{
    std::shared_lock lock(mutex_);
    auto pair = who ? who : busiest_pair(annotations_);
    if (!pair) {
        AgreementReport empty;
        empty.no_overlap = true;
        for (auto a : kAspects)
            empty.rows.push_back({a, {}, false});
        return empty;
    }
    if (used)
        *used = *pair;
    return agreement_report(annotations_, *pair, linear_weighted);
}

DiscrepancyList AnnotationStore::discrepancies(const std::optional<AnnotatorPair>& who, AnnotatorPair* used) const
{
    std::shared_lock lock(mutex_);
    auto pair = who ? who : busiest_pair(annotations_);
    if (!pair) {
        DiscrepancyList empty;
        empty.no_overlap = true;
        return empty;
    }
    if (used)
        *used = *pair;
    return trollkit::discrepancies(annotations_, *pair);
}

Distribution AnnotationStore::stats() const
{
    auto gold = export_gold();
    return distribution(gold.gold);
}

GoldExport AnnotationStore::export_gold() const
{
    std::shared_lock lock(mutex_);
    return trollkit::export_gold(annotations_, adjudications_);
}

Phase AnnotationStore::phase() const
{
    std::shared_lock lock(mutex_);
    return phase_;
}

void AnnotationStore::set_phase(Phase p)
{
    std::unique_lock lock(mutex_);
    const auto tmp = dir_ / (std::string(kPhaseFile) + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IngestionError("cannot write " + tmp.string());
        out << (p == Phase::Training ? "training" : "production") << '\n';
    }
    std::filesystem::rename(tmp, dir_ / kPhaseFile);
    phase_ = p;
}

std::vector<SnippetAnnotation> AnnotationStore::annotations() const
{
    std::shared_lock lock(mutex_);
    return annotations_;
}

std::vector<Adjudication> AnnotationStore::adjudications() const
{
    std::shared_lock lock(mutex_);
    return adjudications_;
}

std::map<std::string, AnnotatorProgress> AnnotationStore::progress() const
{
    std::shared_lock lock(mutex_);
    std::map<std::string, AnnotatorProgress> out;
    for (const auto& a : annotations_) {
        if (a.phase != Phase::Production)
            continue;
        auto& p = out[a.annotator_id];
        ++(a.discarded ? p.discarded : p.annotated);
    }
    return out;
}

std::map<std::string, std::set<std::string>> AnnotationStore::coverage() const
{
    std::shared_lock lock(mutex_);
    std::map<std::string, std::set<std::string>> out;
    for (const auto& [key, who] : annotators_)
        if (key.second == Phase::Production)
            out[key.first] = who;
    return out;
}

} // namespace trollkit
