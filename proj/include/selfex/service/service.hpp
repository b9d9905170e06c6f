/**
 * @file service.hpp
 * @brief HTTP surface: /ask, /feedback, /webhook, /health, /model/summary.
 *
 * Handlers take and return JSON values so they can be exercised without a
 * socket; mount() wires them onto an httplib::Server. The service keeps no
 * conversation state: each question is answered on its own.
 */

#pragma once

#include <selfex/explain/pipeline.hpp>
#include <selfex/service/record_store.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selfex::service {

struct Response {
    int status = 200;
    nlohmann::json body = nlohmann::json::object();
};

struct ServiceSettings {
    std::string trigger_tag = "#SAMIexplain";
    std::filesystem::path static_dir;
};

namespace detail {

inline Response error(int status, std::string message) { return {status, {{"error", std::move(message)}}}; }

inline bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

/// Accepts true/false or "yes"/"no" (any case).
inline std::optional<bool> yes_no(const nlohmann::json& v) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (s == "yes") return true;
        if (s == "no") return false;
    }
    return std::nullopt;
}

/// Removes every occurrence of tag and trims the result.
inline std::string strip_tag(std::string text, std::string_view tag) {
    for (auto pos = text.find(tag); pos != std::string::npos; pos = text.find(tag, pos)) text.erase(pos, tag.size());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

}  // namespace detail

class Service {
public:
    Service(std::shared_ptr<const explain::ExplainPipeline> pipeline, std::shared_ptr<RecordStore> store,
            ServiceSettings settings = {})
        : pipeline_(std::move(pipeline)), store_(std::move(store)), settings_(std::move(settings)) {
        if (!pipeline_) throw std::invalid_argument("service needs a pipeline");
        if (!store_) throw std::invalid_argument("service needs a record store");
        if (settings_.trigger_tag.empty()) throw std::invalid_argument("trigger tag must not be empty");
    }

    Response ask(const nlohmann::json& body) const {
        if (!body.is_object() || !body.contains("question") || !body["question"].is_string()) {
            return detail::error(400, "body must be {\"question\": string}");
        }
        return ask_question(body["question"].get<std::string>());
    }

    Response feedback(const nlohmann::json& body) const {
        if (!body.is_object() || !body.contains("trace_id") || !body["trace_id"].is_string()) {
            return detail::error(400, "trace_id is required");
        }
        auto clear = body.contains("clear") ? detail::yes_no(body["clear"]) : std::nullopt;
        auto improved = body.contains("improved") ? detail::yes_no(body["improved"]) : std::nullopt;
        if (!clear || !improved) return detail::error(400, "clear and improved must be yes/no");
        Feedback fb{*clear, *improved, {}};
        if (body.contains("comment")) {
            if (!body["comment"].is_string()) return detail::error(400, "comment must be a string");
            fb.comment = body["comment"].get<std::string>();
        }
        const auto trace_id = body["trace_id"].get<std::string>();
        switch (store_->add_feedback(trace_id, std::move(fb))) {
            case FeedbackOutcome::accepted: return {200, {{"accepted", true}, {"trace_id", trace_id}}};
            case FeedbackOutcome::unknown_trace: return detail::error(404, "unknown trace_id " + trace_id);
            case FeedbackOutcome::duplicate: return detail::error(409, "feedback already recorded for " + trace_id);
        }
        return detail::error(500, "unreachable");
    }

    /// Answers only messages carrying the trigger tag (case-sensitive).
    Response webhook(const nlohmann::json& body) const {
        if (!body.is_object() || !body.contains("message_text") || !body["message_text"].is_string()) {
            return detail::error(400, "body must carry message_text");
        }
        const auto text = body["message_text"].get<std::string>();
        const auto author = body.contains("author") && body["author"].is_string()
                                ? body["author"].get<std::string>()
                                : std::string{};
        if (text.find(settings_.trigger_tag) == std::string::npos) {
            return {200, {{"answered", false}, {"author", author}, {"ack", "ignored: no " + settings_.trigger_tag}}};
        }
        auto r = ask_question(detail::strip_tag(text, settings_.trigger_tag));
        if (r.status != 200) return r;
        const auto follow_up = pipeline_->feedback_request();
        r.body["answered"] = true;
        r.body["author"] = author;
        r.body["feedback_request"] = follow_up;
        r.body["replies"] = {r.body["answer"], follow_up};
        return r;
    }

    Response health() const { return {200, {{"status", "ok"}, {"records", store_->size()}}}; }

    Response model_summary() const {
        const auto& m = pipeline_->model();
        const auto& ctx = pipeline_->context();
        return {200,
                {{"agent_name", m.agent_name},
                 {"overview", m.overview},
                 {"root_task", m.root_task.str()},
                 {"tasks", m.tasks.size()},
                 {"methods", m.methods.size()},
                 {"knowledge", m.knowledge.size()},
                 {"level", ctx.level.value()},
                 {"snippets", ctx.snippets.size()},
                 {"templates", pipeline_->templates().version},
                 {"trigger_tag", settings_.trigger_tag}}};
    }

    /// Registers every route on server, plus the static client directory
    /// when one is configured.
    void mount(httplib::Server& server) const {
        auto post = [this, &server](const char* route, Response (Service::*handler)(const nlohmann::json&) const) {
            server.Post(route, [this, handler](const httplib::Request& req, httplib::Response& res) {
                nlohmann::json body;
                try {
                    body = nlohmann::json::parse(req.body);
                } catch (const nlohmann::json::parse_error&) {
                    return send(res, detail::error(400, "body is not valid JSON"));
                }
                send(res, (this->*handler)(body));
            });
        };
        post("/ask", &Service::ask);
        post("/feedback", &Service::feedback);
        post("/webhook", &Service::webhook);
        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
        server.Get("/model/summary",
                   [this](const httplib::Request&, httplib::Response& res) { send(res, model_summary()); });
        if (!settings_.static_dir.empty() && !server.set_mount_point("/", settings_.static_dir.string())) {
            throw std::runtime_error("static_dir " + settings_.static_dir.string() + " is not a directory");
        }
    }

    const RecordStore& store() const noexcept { return *store_; }

private:
    static void send(httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    }

    Response ask_question(const std::string& question) const {
        if (detail::blank(question)) return detail::error(400, "question is empty");
        AskRecord record;
        record.question = question;
        record.timestamp = utc_timestamp();
        try {
            auto result = pipeline_->explain(question);
            record.trace_id = result.trace_id;
            record.answer = result.answer;
            record.question_class = std::string(explain::to_string(result.verdict.question_class));
            record.k = result.verdict.k;
            for (const auto& s : result.used_snippets) record.snippets.push_back(s.snippet.source_id);
        } catch (const explain::ExplainError& e) {
            record.trace_id = e.trace_id();
            record.error = e.what();
            store_->append_ask(record);
            return {502, {{"error", e.what()}, {"trace_id", record.trace_id}}};
        }
        store_->append_ask(record);
        return {200,
                {{"trace_id", record.trace_id},
                 {"answer", record.answer},
                 {"class", record.question_class},
                 {"k", record.k},
                 {"snippets", record.snippets}}};
    }

    std::shared_ptr<const explain::ExplainPipeline> pipeline_;
    std::shared_ptr<RecordStore> store_;
    ServiceSettings settings_;
};

}  // namespace selfex::service
