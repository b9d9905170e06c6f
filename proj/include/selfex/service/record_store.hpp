#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfex::service {

struct Feedback {
    bool clear = false;
    bool improved = false;
    std::string comment;

    friend bool operator==(const Feedback&, const Feedback&) = default;
};

struct AskRecord {
    std::string trace_id;
    std::string question;
    std::string answer;
    std::string question_class;
    int k = 0;
    std::vector<std::string> snippets;
    std::string timestamp;
    std::optional<std::string> error;
    std::optional<Feedback> feedback;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

enum class FeedbackOutcome { accepted, unknown_trace, duplicate };

/// Append-only JSON-lines store of asks and feedback. Writes are serialized;
/// reopening the same file restores every record.
class RecordStore {
public:
    /// An empty path keeps records in memory only.
    explicit RecordStore(std::filesystem::path path = {}) : path_(std::move(path)) {
        if (path_.empty()) return;
        bool torn_tail = false;
        if (std::ifstream in{path_, std::ios::binary}; in) {
            std::string line;
            while (std::getline(in, line)) {
                torn_tail = in.eof();  // last line had no newline
                if (line.empty()) continue;
                nlohmann::json rec;
                try {
                    rec = nlohmann::json::parse(line);
                } catch (const nlohmann::json::parse_error&) {
                    continue;  // torn last line after a crash
                }
                replay(rec);
            }
        }
        out_.open(path_, std::ios::app | std::ios::binary);
        if (!out_) throw std::runtime_error("cannot open record store " + path_.string());
        // keep the next record off a torn line
        if (torn_tail) out_ << '\n' << std::flush;
    }

    void append_ask(AskRecord record) {
        std::lock_guard lock(mutex_);
        if (records_.contains(record.trace_id)) {
            throw std::logic_error("trace id reused: " + record.trace_id);
        }
        write(ask_json(record));
        order_.push_back(record.trace_id);
        records_.emplace(record.trace_id, std::move(record));
    }

    FeedbackOutcome add_feedback(const std::string& trace_id, Feedback feedback) {
        std::lock_guard lock(mutex_);
        auto it = records_.find(trace_id);
        if (it == records_.end()) return FeedbackOutcome::unknown_trace;
        if (it->second.feedback) return FeedbackOutcome::duplicate;
        write({{"type", "feedback"},
               {"trace_id", trace_id},
               {"clear", feedback.clear},
               {"improved", feedback.improved},
               {"comment", feedback.comment},
               {"timestamp", utc_timestamp()}});
        it->second.feedback = std::move(feedback);
        return FeedbackOutcome::accepted;
    }

    std::optional<AskRecord> find(const std::string& trace_id) const {
        std::lock_guard lock(mutex_);
        auto it = records_.find(trace_id);
        if (it == records_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<AskRecord> all() const {
        std::lock_guard lock(mutex_);
        std::vector<AskRecord> out;
        for (const auto& id : order_) out.push_back(records_.at(id));
        return out;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return records_.size();
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    static nlohmann::json ask_json(const AskRecord& r) {
        nlohmann::json rec{{"type", "ask"},         {"trace_id", r.trace_id}, {"question", r.question},
                           {"answer", r.answer},     {"class", r.question_class}, {"k", r.k},
                           {"snippets", r.snippets}, {"timestamp", r.timestamp}};
        if (r.error) rec["error"] = *r.error;
        return rec;
    }

    void replay(const nlohmann::json& rec) {
        const auto type = rec.value("type", std::string{});
        if (type == "ask") {
            AskRecord r;
            r.trace_id = rec.at("trace_id").get<std::string>();
            r.question = rec.value("question", std::string{});
            r.answer = rec.value("answer", std::string{});
            r.question_class = rec.value("class", std::string{});
            r.k = rec.value("k", 0);
            r.snippets = rec.value("snippets", std::vector<std::string>{});
            r.timestamp = rec.value("timestamp", std::string{});
            if (rec.contains("error")) r.error = rec.at("error").get<std::string>();
            if (records_.emplace(r.trace_id, r).second) order_.push_back(r.trace_id);
        } else if (type == "feedback") {
            auto it = records_.find(rec.at("trace_id").get<std::string>());
            if (it != records_.end() && !it->second.feedback) {
                it->second.feedback = Feedback{rec.value("clear", false), rec.value("improved", false),
                                               rec.value("comment", std::string{})};
            }
        }
    }

    void write(const nlohmann::json& rec) {
        if (path_.empty()) return;
        out_ << rec.dump() << '\n';
        out_.flush();
        if (!out_) throw std::runtime_error("write to record store failed");
    }

    std::filesystem::path path_;
    std::ofstream out_;
    std::map<std::string, AskRecord> records_;
    std::vector<std::string> order_;
    mutable std::mutex mutex_;
};

}  // namespace selfex::service
