/**
 * @file config.hpp
 * @brief Service configuration file and pipeline assembly.
 *
 * {
 *   "model_path": "data/models/sami-mini.tmk.json",
 *   "provider": {"kind": "mock", "script_path": "data/mock/sami.mock.jsonl"},
 *   "host": "127.0.0.1", "port": 8080,
 *   "trigger_tag": "#SAMIexplain",
 *   "k_max": 10, "default_k": 5, "level": 0,
 *   "templates_dir": "templates/v1",
 *   "store_path": "records.jsonl",
 *   "static_dir": ""
 * }
 *
 * A live provider looks like {"kind": "live", "base_url": ..., "api_key_env":
 * ..., "model_name": ..., "timeout_ms": ..., "max_retries": ...,
 * "backoff_ms": ..., "temperature": ...}. Relative paths resolve against the
 * directory of the config file.
 */

#pragma once

#include <selfex/explain/pipeline.hpp>
#include <selfex/llm/http_provider.hpp>
#include <selfex/llm/scripted_mock.hpp>
#include <selfex/tmk/json_io.hpp>
#include <selfex/tmk/validate.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace selfex::service {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProviderSelection {
    enum class Kind { live, mock } kind = Kind::mock;
    std::filesystem::path script_path;  // mock
    llm::ProviderConfig live;           // live
    std::string model_name = "gpt-3.5-turbo-instruct";
    double temperature = 0.0;
};

struct ServiceConfig {
    std::filesystem::path model_path;
    ProviderSelection provider;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string trigger_tag = "#SAMIexplain";
    int k_max = 10;
    int default_k = 5;
    int level = 0;
    std::filesystem::path templates_dir;
    std::filesystem::path store_path;
    std::filesystem::path static_dir;

    static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
        auto resolve = [&base](const std::string& p) -> std::filesystem::path {
            if (p.empty()) return {};
            std::filesystem::path path(p);
            return path.is_absolute() || base.empty() ? path : base / path;
        };
        ServiceConfig c;
        try {
            c.model_path = resolve(j.at("model_path").get<std::string>());
            c.host = j.value("host", c.host);
            c.port = j.value("port", c.port);
            c.trigger_tag = j.value("trigger_tag", c.trigger_tag);
            c.k_max = j.value("k_max", c.k_max);
            c.default_k = j.value("default_k", c.default_k);
            c.level = j.value("level", c.level);
            c.templates_dir = resolve(j.value("templates_dir", std::string{}));
            c.store_path = resolve(j.value("store_path", std::string{}));
            c.static_dir = resolve(j.value("static_dir", std::string{}));

            const auto& p = j.at("provider");
            const auto kind = p.at("kind").get<std::string>();
            c.provider.model_name = p.value("model_name", c.provider.model_name);
            c.provider.temperature = p.value("temperature", 0.0);
            if (kind == "mock") {
                c.provider.kind = ProviderSelection::Kind::mock;
                c.provider.script_path = resolve(p.at("script_path").get<std::string>());
            } else if (kind == "live") {
                c.provider.kind = ProviderSelection::Kind::live;
                auto& live = c.provider.live;
                live.base_url = p.value("base_url", live.base_url);
                live.api_key_env = p.value("api_key_env", live.api_key_env);
                live.timeout = std::chrono::milliseconds(p.value("timeout_ms", live.timeout.count()));
                live.max_retries = p.value("max_retries", live.max_retries);
                live.backoff_base = std::chrono::milliseconds(p.value("backoff_ms", live.backoff_base.count()));
            } else {
                throw ConfigError("provider.kind must be \"mock\" or \"live\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad service config: ") + e.what());
        }
        if (c.trigger_tag.empty()) throw ConfigError("trigger_tag must not be empty");
        if (c.k_max < 1) throw ConfigError("k_max must be at least 1");
        if (c.level < 0 || c.level > 6) throw ConfigError("level must be within 0..6");
        return c;
    }

    static ServiceConfig load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ConfigError("cannot open config " + path.string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config " + path.string() + ": " + e.what());
        }
        return from_json(j, path.parent_path());
    }
};

/// Loads and validates the model; any parse error or violation is a
/// ConfigError.
inline std::shared_ptr<const tmk::TmkModel> load_valid_model(const std::filesystem::path& path) {
    tmk::TmkModel model;
    try {
        model = tmk::load_model(path);
    } catch (const tmk::ModelError& e) {
        throw ConfigError("model " + path.string() + ": " + e.what());
    }
    if (auto report = tmk::validate(model); !report.ok()) {
        const auto& v = report.violations.front();
        throw ConfigError("model " + path.string() + " is invalid (" + std::to_string(report.violations.size()) +
                          " violations, first: " + v.rule + " at " + v.node_id + ")");
    }
    return std::make_shared<const tmk::TmkModel>(std::move(model));
}

inline std::shared_ptr<llm::ChatProvider> make_provider(const ProviderSelection& p) {
    try {
        if (p.kind == ProviderSelection::Kind::mock) {
            return std::make_shared<llm::ScriptedMock>(llm::ScriptedMock::load(p.script_path));
        }
        return std::make_shared<llm::HttpChatProvider>(p.live);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("provider: ") + e.what());
    }
}

inline explain::PromptTemplates load_templates(const std::filesystem::path& dir) {
    if (dir.empty()) return explain::PromptTemplates::defaults();
    if (!std::filesystem::is_directory(dir)) throw ConfigError("templates_dir " + dir.string() + " is not a directory");
    return explain::PromptTemplates::load(dir);
}

inline std::shared_ptr<const explain::ExplainPipeline> build_pipeline(const ServiceConfig& c,
                                                                      std::shared_ptr<llm::ChatProvider> provider = {}) {
    auto model = load_valid_model(c.model_path);
    if (!provider) provider = make_provider(c.provider);
    explain::PipelineOptions options;
    options.k_max = c.k_max;
    options.default_k = c.default_k;
    options.model_name = c.provider.model_name;
    options.reason_temperature = c.provider.temperature;
    return std::make_shared<const explain::ExplainPipeline>(explain::ExplainPipeline::at_level(
        std::move(model), tmk::DegradationLevel{c.level}, std::move(provider), load_templates(c.templates_dir),
        options));
}

}  // namespace selfex::service
