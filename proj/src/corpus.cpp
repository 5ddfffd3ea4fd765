#include "trollkit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "trollkit/errors.hpp"
#include "trollkit/parallel.hpp"

namespace trollkit {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string strip_prefix(const std::string& s, std::string_view prefix)
{
    if (s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0)
        return s.substr(prefix.size());
    return s;
}

std::optional<std::string> string_field(const json& obj, const std::string& key)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        return std::nullopt;
    return it->get<std::string>();
}

// Returns nullopt when the record does not fit the format.
std::optional<Comment> comment_from_record(const json& obj, const DumpFormat& fmt)
{
    if (!obj.is_object())
        return std::nullopt;
    auto id = string_field(obj, fmt.id_field);
    auto thread = string_field(obj, fmt.thread_field);
    auto body = string_field(obj, fmt.body_field);
    if (!id || id->empty() || !thread || !body)
        return std::nullopt;

    Comment c;
    c.id = fmt.reddit_fullnames ? strip_prefix(*id, "t1_") : *id;
    c.thread_id = fmt.reddit_fullnames ? strip_prefix(*thread, "t3_") : *thread;
    c.body = *body;
    c.author = string_field(obj, fmt.author_field).value_or("");

    auto pit = obj.find(fmt.parent_field);
    if (pit != obj.end() && !pit->is_null()) {
        if (!pit->is_string())
            return std::nullopt;
        std::string parent = pit->get<std::string>();
        if (fmt.reddit_fullnames) {
            if (parent.rfind("t3_", 0) == 0)
                parent.clear();
            else
                parent = strip_prefix(parent, "t1_");
        }
        if (!parent.empty())
            c.parent_id = std::move(parent);
    }

    auto cit = obj.find(fmt.created_field);
    if (cit != obj.end()) {
        if (cit->is_number_integer()) {
            c.created_utc = cit->get<std::int64_t>();
        } else if (cit->is_number()) {
            c.created_utc = static_cast<std::int64_t>(cit->get<double>());
        } else if (cit->is_string()) {
            try {
                std::size_t used = 0;
                const auto& s = cit->get_ref<const std::string&>();
                c.created_utc = std::stoll(s, &used);
                if (used != s.size())
                    return std::nullopt;
            } catch (const std::exception&) {
                return std::nullopt;
            }
        } else {
            return std::nullopt;
        }
    }
    c.deleted = c.body == fmt.deletion_sentinel;
    return c;
}

bool comment_before(const Comment& a, const Comment& b)
{
    if (a.created_utc != b.created_utc)
        return a.created_utc < b.created_utc;
    return a.id < b.id;
}

} // namespace

DumpFormat dump_format(std::string_view format_id)
{
    DumpFormat f;
    if (format_id == "jsonl") {
        return f;
    }
    if (format_id == "reddit-jsonl") {
        f.id = "reddit-jsonl";
        f.thread_field = "link_id";
        f.reddit_fullnames = true;
        return f;
    }
    throw InputError("unknown dump format '" + std::string(format_id) + "'");
}

ParseResult parse_dump(std::istream& in, const DumpFormat& format)
{
    if (!in)
        throw IngestionError("dump stream is not readable");
    ParseResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        ++result.records;
        json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded()) {
            ++result.malformed;
            continue;
        }
        if (auto c = comment_from_record(obj, format))
            result.comments.push_back(std::move(*c));
        else
            ++result.malformed;
    }
    if (in.bad())
        throw IngestionError("read error while scanning dump");
    if (result.records > 0 && result.malformed * 2 > result.records)
        throw FormatMismatchError(std::to_string(result.malformed) + " of " + std::to_string(result.records) +
                                  " records do not match format '" + format.id + "'");
    return result;
}

ParseResult parse_dump_file(const std::filesystem::path& path, const DumpFormat& format)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot open dump " + path.string());
    return parse_dump(in, format);
}

// --- threads --------------------------------------------------------------

const std::vector<std::string>& ConversationThread::children_of(std::string_view id) const
{
    static const std::vector<std::string> none;
    if (id == kSyntheticRoot)
        return orphans;
    auto it = children.find(std::string(id));
    return it == children.end() ? none : it->second;
}

bool ConversationThread::is_orphan(std::string_view id) const
{
    return std::find(orphans.begin(), orphans.end(), id) != orphans.end();
}

ThreadMap build_threads(const std::vector<Comment>& comments)
{
    ThreadMap threads;
    std::unordered_map<std::string, std::string> thread_of;
    for (const auto& c : comments) {
        if (c.parent_id && *c.parent_id == c.id)
            throw StructuralError("comment " + c.id + " is its own parent");
        if (!thread_of.emplace(c.id, c.thread_id).second)
            throw StructuralError("duplicate comment id " + c.id);
        auto& t = threads[c.thread_id];
        t.thread_id = c.thread_id;
        t.comments.emplace(c.id, c);
    }

    for (auto& [tid, t] : threads) {
        std::vector<const Comment*> ordered;
        ordered.reserve(t.comments.size());
        for (const auto& [id, c] : t.comments)
            ordered.push_back(&c);
        std::sort(ordered.begin(), ordered.end(),
                  [](const Comment* a, const Comment* b) { return comment_before(*a, *b); });

        for (const Comment* c : ordered) {
            if (!c->parent_id)
                t.roots.push_back(c->id);
            else if (t.comments.count(*c->parent_id))
                t.children[*c->parent_id].push_back(c->id);
            else
                t.orphans.push_back(c->id);
        }

        // Every comment must reach a root or an orphan by walking parents.
        enum class Mark : unsigned char { none, active, done };
        std::unordered_map<std::string, Mark> mark;
        for (const Comment* start : ordered) {
            std::vector<std::string> path;
            const Comment* cur = start;
            while (true) {
                auto& m = mark[cur->id];
                if (m == Mark::done)
                    break;
                if (m == Mark::active) {
                    auto first = std::find(path.begin(), path.end(), cur->id);
                    std::string ids;
                    for (auto it = first; it != path.end(); ++it)
                        ids += (ids.empty() ? "" : " -> ") + *it;
                    throw StructuralError("reply cycle in thread " + tid + ": " + ids);
                }
                m = Mark::active;
                path.push_back(cur->id);
                if (!cur->parent_id)
                    break;
                auto pit = t.comments.find(*cur->parent_id);
                if (pit == t.comments.end())
                    break;
                cur = &pit->second;
            }
            for (const auto& id : path)
                mark[id] = Mark::done;
        }
    }
    return threads;
}

// --- mining ---------------------------------------------------------------

std::size_t levenshtein(std::string_view a, std::string_view b)
{
    if (a.size() < b.size())
        std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j)
        row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

std::vector<std::string> letter_tokens(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        auto u = static_cast<unsigned char>(ch);
        if (u >= 0x80 || (u >= 'a' && u <= 'z')) {
            cur.push_back(ch);
        } else if (u >= 'A' && u <= 'Z') {
            cur.push_back(static_cast<char>(u - 'A' + 'a'));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

bool contains_trigger(std::string_view text, const TriggerConfig& config)
{
    const std::size_t target = config.trigger.size();
    for (const auto& tok : letter_tokens(text)) {
        std::size_t gap = tok.size() > target ? tok.size() - target : target - tok.size();
        if (gap > config.max_distance)
            continue;
        if (levenshtein(tok, config.trigger) <= config.max_distance)
            return true;
    }
    return false;
}

std::set<std::string> find_suspects(const ConversationThread& thread, const TriggerConfig& config)
{
    std::set<std::string> suspects;
    for (const auto& [parent, kids] : thread.children) {
        for (const auto& kid : kids) {
            const Comment& c = thread.comments.at(kid);
            if (!c.deleted && contains_trigger(c.body, config)) {
                suspects.insert(parent);
                break;
            }
        }
    }
    return suspects;
}

std::vector<Snippet> extract_snippets(const ConversationThread& thread,
                                      const std::set<std::string>& suspects,
                                      ExtractStats* stats)
{
    std::vector<const Comment*> attempts;
    for (const auto& id : suspects) {
        auto it = thread.comments.find(id);
        if (it == thread.comments.end())
            throw InputError("suspect " + id + " is not in thread " + thread.thread_id);
        attempts.push_back(&it->second);
    }
    std::sort(attempts.begin(), attempts.end(),
              [](const Comment* a, const Comment* b) { return comment_before(*a, *b); });

    ExtractStats local;
    std::vector<Snippet> out;
    for (const Comment* attempt : attempts) {
        ++local.suspects;
        if (attempt->deleted) {
            ++local.dropped;
            continue;
        }
        Snippet s;
        s.snippet_id = attempt->id;
        s.thread_id = thread.thread_id;
        s.attempt = *attempt;
        for (const auto& kid : thread.children_of(attempt->id)) {
            const Comment& r = thread.comments.at(kid);
            if (!r.deleted)
                s.responses.push_back(r);
        }
        if (s.responses.empty()) {
            ++local.dropped;
            continue;
        }
        if (attempt->parent_id) {
            auto pit = thread.comments.find(*attempt->parent_id);
            if (pit != thread.comments.end() && !pit->second.deleted)
                s.context = pit->second;
        }
        out.push_back(std::move(s));
        ++local.emitted;
    }
    if (stats) {
        stats->suspects += local.suspects;
        stats->emitted += local.emitted;
        stats->dropped += local.dropped;
    }
    return out;
}

std::vector<Snippet> mine_snippets(const ThreadMap& threads, const TriggerConfig& config, ExtractStats* stats)
{
    std::vector<const ConversationThread*> order;
    order.reserve(threads.size());
    for (const auto& [id, t] : threads)
        order.push_back(&t);

    std::vector<std::vector<Snippet>> per_thread(order.size());
    std::vector<ExtractStats> per_stats(order.size());
    const auto n = static_cast<std::ptrdiff_t>(order.size());
    TROLLKIT_OMP_PARALLEL_FOR_DYNAMIC
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& t = *order[static_cast<std::size_t>(i)];
        per_thread[static_cast<std::size_t>(i)] =
            extract_snippets(t, find_suspects(t, config), &per_stats[static_cast<std::size_t>(i)]);
    }

    std::vector<Snippet> out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (auto& s : per_thread[i])
            out.push_back(std::move(s));
        if (stats) {
            stats->suspects += per_stats[i].suspects;
            stats->emitted += per_stats[i].emitted;
            stats->dropped += per_stats[i].dropped;
        }
    }
    return out;
}

// --- serialization --------------------------------------------------------

ordered_json to_json(const Comment& c)
{
    ordered_json j;
    j["id"] = c.id;
    j["parent_id"] = c.parent_id ? ordered_json(*c.parent_id) : ordered_json(nullptr);
    j["thread_id"] = c.thread_id;
    j["author"] = c.author;
    j["body"] = c.body;
    j["created_utc"] = c.created_utc;
    j["deleted"] = c.deleted;
    return j;
}

Comment comment_from_json(const json& j)
{
    try {
        Comment c;
        c.id = j.at("id").get<std::string>();
        if (auto it = j.find("parent_id"); it != j.end() && !it->is_null())
            c.parent_id = it->get<std::string>();
        c.thread_id = j.at("thread_id").get<std::string>();
        c.author = j.value("author", std::string());
        c.body = j.at("body").get<std::string>();
        c.created_utc = j.value("created_utc", std::int64_t{0});
        c.deleted = j.value("deleted", false);
        return c;
    } catch (const json::exception& e) {
        throw InputError(std::string("bad comment record: ") + e.what());
    }
}

ordered_json to_json(const Snippet& s)
{
    ordered_json j;
    j["snippet_id"] = s.snippet_id;
    j["thread_id"] = s.thread_id;
    j["context"] = s.context ? to_json(*s.context) : ordered_json(nullptr);
    j["attempt"] = to_json(s.attempt);
    auto responses = ordered_json::array();
    for (const auto& r : s.responses)
        responses.push_back(to_json(r));
    j["responses"] = std::move(responses);
    return j;
}

Snippet snippet_from_json(const json& j)
{
    Snippet s;
    try {
        s.snippet_id = j.at("snippet_id").get<std::string>();
        s.thread_id = j.at("thread_id").get<std::string>();
        if (auto it = j.find("context"); it != j.end() && !it->is_null())
            s.context = comment_from_json(*it);
        s.attempt = comment_from_json(j.at("attempt"));
        for (const auto& r : j.at("responses"))
            s.responses.push_back(comment_from_json(r));
    } catch (const json::exception& e) {
        throw InputError(std::string("bad snippet record: ") + e.what());
    }
    if (s.responses.empty())
        throw InputError("snippet " + s.snippet_id + " has no responses");
    if (s.attempt.deleted || (s.context && s.context->deleted))
        throw InputError("snippet " + s.snippet_id + " carries a deleted comment");
    for (const auto& r : s.responses) {
        if (r.parent_id != s.attempt.id)
            throw InputError("response " + r.id + " does not reply to attempt " + s.attempt.id);
        if (r.deleted)
            throw InputError("snippet " + s.snippet_id + " carries a deleted response");
    }
    return s;
}

void write_threads(std::ostream& out, const ThreadMap& threads)
{
    for (const auto& [tid, t] : threads) {
        std::vector<const Comment*> ordered;
        for (const auto& [id, c] : t.comments)
            ordered.push_back(&c);
        std::sort(ordered.begin(), ordered.end(),
                  [](const Comment* a, const Comment* b) { return comment_before(*a, *b); });
        ordered_json j;
        j["thread_id"] = tid;
        auto arr = ordered_json::array();
        for (const Comment* c : ordered)
            arr.push_back(to_json(*c));
        j["comments"] = std::move(arr);
        out << j.dump() << '\n';
    }
}

ThreadMap read_threads(std::istream& in)
{
    std::vector<Comment> comments;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("comments"))
            throw InputError("threads file line " + std::to_string(lineno) + " is not a thread record");
        for (const auto& c : j["comments"])
            comments.push_back(comment_from_json(c));
    }
    return build_threads(comments);
}

void write_snippets(std::ostream& out, const std::vector<Snippet>& snippets)
{
    for (const auto& s : snippets)
        out << to_json(s).dump() << '\n';
}

std::vector<Snippet> read_snippets(std::istream& in)
{
    std::vector<Snippet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw InputError("snippet file line " + std::to_string(lineno) + " is not JSON");
        out.push_back(snippet_from_json(j));
    }
    return out;
}

std::vector<Snippet> read_snippets_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IngestionError("cannot open snippets " + path.string());
    return read_snippets(in);
}

} // namespace trollkit
