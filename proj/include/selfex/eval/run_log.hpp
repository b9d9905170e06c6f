#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace selfex::eval {

/// Append-only JSON-lines log of study answers. Reopening a log over an
/// existing file replays it, so an interrupted study skips the runs that
/// already finished. Only successful answers are replayed.
class RunLog {
public:
    explicit RunLog(std::filesystem::path path) : path_(std::move(path)) {
        bool torn_tail = false;
        if (std::ifstream in{path_, std::ios::binary}; in) {
            std::string line;
            while (std::getline(in, line)) {
                torn_tail = in.eof();
                if (line.empty()) continue;
                try {
                    const auto rec = nlohmann::json::parse(line);
                    if (rec.contains("error")) continue;
                    done_[rec.at("key").get<std::string>()] = rec.at("answer").get<std::string>();
                } catch (const nlohmann::json::exception&) {
                    // a torn final line from an interrupted run
                }
            }
        }
        out_.open(path_, std::ios::app | std::ios::binary);
        if (!out_) throw std::runtime_error("cannot open run log " + path_.string());
        if (torn_tail) out_ << '\n' << std::flush;
    }

    std::optional<std::string> find(const std::string& key) const {
        std::lock_guard lock(mutex_);
        auto it = done_.find(key);
        if (it == done_.end()) return std::nullopt;
        return it->second;
    }

    void record(const std::string& key, nlohmann::json fields, const std::string& answer) {
        fields["key"] = key;
        fields["answer"] = answer;
        std::lock_guard lock(mutex_);
        out_ << fields.dump() << '\n';
        out_.flush();
        done_[key] = answer;
    }

    void record_error(const std::string& key, nlohmann::json fields, const std::string& error) {
        fields["key"] = key;
        fields["error"] = error;
        std::lock_guard lock(mutex_);
        out_ << fields.dump() << '\n';
        out_.flush();
    }

    std::size_t completed() const {
        std::lock_guard lock(mutex_);
        return done_.size();
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::map<std::string, std::string> done_;
    mutable std::mutex mutex_;
};

}  // namespace selfex::eval
