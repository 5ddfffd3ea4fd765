#pragma once

// Small builders shared by the unit tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "trollkit/corpus.hpp"
#include "trollkit/schema.hpp"

namespace fixtures {

inline trollkit::Comment comment(std::string id, std::string body, std::string author = "someone",
                                 std::optional<std::string> parent = std::nullopt, std::int64_t t = 0)
{
    trollkit::Comment c;
    c.id = std::move(id);
    c.parent_id = std::move(parent);
    c.thread_id = "t";
    c.author = std::move(author);
    c.body = std::move(body);
    c.created_utc = t;
    return c;
}

// Snippet "s<k>" with n responses "s<k>r<j>".
inline trollkit::Snippet snippet(const std::string& id, std::size_t n_responses,
                                 const std::string& attempt_body = "you are all wrong",
                                 const std::vector<std::string>& response_bodies = {})
{
    trollkit::Snippet s;
    s.snippet_id = id;
    s.thread_id = "t";
    s.context = comment(id + "c", "what do you think", "asker");
    s.attempt = comment(id, attempt_body, "poster", id + "c", 1);
    for (std::size_t j = 0; j < n_responses; ++j) {
        std::string body = j < response_bodies.size() ? response_bodies[j] : "what a troll";
        s.responses.push_back(comment(id + "r" + std::to_string(j), body, "replier" + std::to_string(j), id, 2 + j));
    }
    return s;
}

inline trollkit::SnippetAnnotation annotation(const trollkit::Snippet& s, std::string annotator,
                                              trollkit::Intention i, trollkit::Disclosure d,
                                              const std::vector<trollkit::ResponsePair>& pairs)
{
    trollkit::SnippetAnnotation a;
    a.snippet_id = s.snippet_id;
    a.annotator_id = std::move(annotator);
    a.attempt = trollkit::AttemptLabel{i, d};
    for (std::size_t j = 0; j < pairs.size(); ++j)
        a.responses.push_back({s.responses[j].id, pairs[j].interpretation, pairs[j].strategy});
    a.submitted_at = "2026-01-01T00:00:00Z";
    return a;
}

inline trollkit::SnippetAnnotation discard(const trollkit::Snippet& s, std::string annotator)
{
    trollkit::SnippetAnnotation a;
    a.snippet_id = s.snippet_id;
    a.annotator_id = std::move(annotator);
    a.discarded = true;
    a.submitted_at = "2026-01-01T00:00:00Z";
    return a;
}

// A valid random label tuple for s.
template <typename Rng>
trollkit::SnippetAnnotation random_valid(const trollkit::Snippet& s, std::string annotator, Rng& rng)
{
    using namespace trollkit;
    static const std::pair<Intention, Disclosure> attempts[] = {
        {Intention::Trolling, Disclosure::Exposed}, {Intention::Trolling, Disclosure::Hidden},
        {Intention::Playing, Disclosure::Exposed},  {Intention::Playing, Disclosure::Hidden},
        {Intention::NoTrolling, Disclosure::None}};
    auto [i, d] = attempts[rng() % 5];
    std::vector<ResponsePair> pairs;
    for (std::size_t j = 0; j < s.responses.size(); ++j) {
        ResponsePair p{static_cast<Interpretation>(rng() % 3), static_cast<Strategy>(rng() % 7)};
        if (p.interpretation != Interpretation::NoTrolling && p.strategy == Strategy::Normal)
            p.strategy = Strategy::Engage;
        pairs.push_back(p);
    }
    return annotation(s, std::move(annotator), i, d, pairs);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("trollkit-" + tag + "-" + std::to_string(rd()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace fixtures
