#pragma once

// Comment dump ingestion, reply-tree reconstruction and suspect mining.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace trollkit {

struct Comment {
    std::string id;
    std::optional<std::string> parent_id; // absent for top-level comments
    std::string thread_id;
    std::string author;
    std::string body;
    std::int64_t created_utc = 0;
    bool deleted = false;

    bool operator==(const Comment&) const = default;
};

// Field-name mapping for one line-delimited JSON dump flavour.
struct DumpFormat {
    std::string id = "jsonl";
    std::string id_field = "id";
    std::string parent_field = "parent_id";
    std::string thread_field = "thread_id";
    std::string author_field = "author";
    std::string body_field = "body";
    std::string created_field = "created_utc";
    // Reddit "fullname" ids carry a type prefix (t1_ comment, t3_ link).
    // When set, t1_ is stripped from parents and a t3_ parent means top-level.
    bool reddit_fullnames = false;
    std::string deletion_sentinel = "[deleted]";
};

// Known ids: "reddit-jsonl", "jsonl". Throws InputError for anything else.
DumpFormat dump_format(std::string_view format_id);

struct ParseResult {
    std::vector<Comment> comments;
    std::size_t records = 0;   // non-blank lines seen
    std::size_t malformed = 0; // lines skipped
};

ParseResult parse_dump(std::istream& in, const DumpFormat& format);
ParseResult parse_dump_file(const std::filesystem::path& path, const DumpFormat& format);

struct ConversationThread {
    std::string thread_id;
    std::map<std::string, Comment> comments;
    // Only comments that have replies get an entry; children ordered by (created_utc, id).
    std::map<std::string, std::vector<std::string>> children;
    std::vector<std::string> roots;   // parent_id absent
    std::vector<std::string> orphans; // parent_id names a comment missing from the dump

    // Orphans hang off this synthetic root in children_of().
    static constexpr std::string_view kSyntheticRoot = "<orphan-root>";

    const std::vector<std::string>& children_of(std::string_view id) const;
    bool is_orphan(std::string_view id) const;
};

using ThreadMap = std::map<std::string, ConversationThread>;

// Throws StructuralError on duplicate ids, self-parenting, or reply cycles.
ThreadMap build_threads(const std::vector<Comment>& comments);

// Unit-cost insert/delete/substitute edit distance over bytes.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Maximal runs of letters, lowercased. Non-ASCII bytes count as letters so
// multibyte words are never split.
std::vector<std::string> letter_tokens(std::string_view text);

struct TriggerConfig {
    std::string trigger = "troll";
    std::size_t max_distance = 1;
};

bool contains_trigger(std::string_view text, const TriggerConfig& config = {});

// Ids of comments with at least one non-deleted direct reply carrying a trigger token.
std::set<std::string> find_suspects(const ConversationThread& thread, const TriggerConfig& config = {});

struct Snippet {
    std::string snippet_id;
    std::string thread_id;
    std::optional<Comment> context;
    Comment attempt;
    std::vector<Comment> responses;

    bool operator==(const Snippet&) const = default;
};

struct ExtractStats {
    std::size_t suspects = 0;
    std::size_t emitted = 0;
    std::size_t dropped = 0; // deleted attempt or no surviving responses
};

std::vector<Snippet> extract_snippets(const ConversationThread& thread,
                                      const std::set<std::string>& suspects,
                                      ExtractStats* stats = nullptr);

// find_suspects + extract_snippets over every thread. Threads are processed
// concurrently; output is ordered by thread id, then attempt order.
std::vector<Snippet> mine_snippets(const ThreadMap& threads, const TriggerConfig& config = {},
                                   ExtractStats* stats = nullptr);

// --- serialization -------------------------------------------------------

nlohmann::ordered_json to_json(const Comment& c);
Comment comment_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Snippet& s);
Snippet snippet_from_json(const nlohmann::json& j);

// One thread per line: {"thread_id":…, "comments":[…]}, thread ids ascending.
void write_threads(std::ostream& out, const ThreadMap& threads);
ThreadMap read_threads(std::istream& in);

void write_snippets(std::ostream& out, const std::vector<Snippet>& snippets);
std::vector<Snippet> read_snippets(std::istream& in);
std::vector<Snippet> read_snippets_file(const std::filesystem::path& path);

} // namespace trollkit
