/**
 * @file json_io.hpp
 * @brief Reading and writing `.tmk.json` model documents.
 *
 * Document layout:
 *
 *   { "agent_name": "...", "overview": "...", "root_task": "<task-id>",
 *     "tasks":     { "<task-id>": {"name","description","achieved_by":[...]} },
 *     "methods":   { "<method-id>": {"name","description","parent_task",
 *                     "states":[...],"start_state","terminal_states":[...],
 *                     "transitions":[{"from","to",
 *                        "annotation":{"kind":"task"|"knowledge","ref":id},
 *                        "description"}]} },
 *     "knowledge": { "<knowledge-id>": {"name","description","properties":{...}} } }
 *
 * Task, method and knowledge ids are lowercase kebab-case and share one
 * namespace.
 */

#pragma once

#include <selfex/tmk/error.hpp>
#include <selfex/tmk/model.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace selfex::tmk {

namespace detail {

using nlohmann::json;

inline bool is_kebab_id(std::string_view id) {
    if (id.empty() || id.front() == '-' || id.back() == '-') return false;
    char prev = 0;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok || (c == '-' && prev == '-')) return false;
        prev = c;
    }
    return true;
}

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    // nlohmann reports the 1-based index of the character after the error.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
    throw ModelError(ModelErrorKind::schema, path, path + ": " + what);
}

inline const json& require(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(path + "." + key, "missing field");
    return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) schema_error(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline const json& require_object(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_object()) schema_error(path + "." + key, "expected an object");
    return v;
}

inline std::vector<std::string> require_string_array(const json& obj, const char* key,
                                                     const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_array()) schema_error(path + "." + key, "expected an array");
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) schema_error(path + "." + key, "expected an array of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

inline void check_id(const std::string& id, const std::string& path) {
    if (!is_kebab_id(id)) schema_error(path, "id '" + id + "' is not lowercase kebab-case");
}

// Duplicate object keys are dropped silently by most JSON parsers, so they
// are caught during the parse itself.
struct DuplicateKeyTracker {
    std::vector<std::set<std::string>> open;
    std::vector<std::string> key_at_depth;
    std::optional<std::pair<std::string, std::string>> first;  // (section, key)

    bool operator()(int depth, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start: open.emplace_back(); break;
            case json::parse_event_t::object_end:
                if (!open.empty()) open.pop_back();
                break;
            case json::parse_event_t::key: {
                const auto key = parsed.get<std::string>();
                const auto d = static_cast<std::size_t>(depth);
                if (key_at_depth.size() <= d) key_at_depth.resize(d + 1);
                key_at_depth[d] = key;
                if (!open.empty() && !open.back().insert(key).second && !first) {
                    first = {d >= 2 ? key_at_depth[1] : std::string{}, key};
                }
                break;
            }
            default: break;
        }
        return true;
    }
};

}  // namespace detail

/// Parses a model document. Throws ModelError; the kind distinguishes
/// syntax, schema, duplicate-id and dangling-reference failures.
inline TmkModel parse_model(std::string_view text) {
    using detail::json;

    detail::DuplicateKeyTracker tracker;
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(),
                          [&tracker](int depth, json::parse_event_t ev, json& parsed) {
                              return tracker(depth, ev, parsed);
                          });
    } catch (const json::parse_error& e) {
        auto [line, col] = detail::line_column(text, e.byte);
        throw ModelError(ModelErrorKind::syntax, {},
                         "line " + std::to_string(line) + ", column " + std::to_string(col) +
                             ": " + e.what(),
                         line, col);
    }
    if (tracker.first) {
        const auto& [section, key] = *tracker.first;
        if (section == "tasks" || section == "methods" || section == "knowledge") {
            throw ModelError(ModelErrorKind::duplicate_id, key,
                             "id '" + key + "' declared twice in " + section);
        }
        throw ModelError(ModelErrorKind::schema, key, "duplicate key '" + key + "'");
    }
    if (!doc.is_object()) detail::schema_error("$", "expected a top-level object");

    TmkModel model;
    model.agent_name = detail::require_string(doc, "agent_name", "$");
    model.overview = detail::require_string(doc, "overview", "$");
    model.root_task = TaskId{detail::require_string(doc, "root_task", "$")};

    std::set<std::string> declared;
    auto declare = [&declared](const std::string& id, const std::string& path) {
        detail::check_id(id, path);
        if (!declared.insert(id).second) {
            throw ModelError(ModelErrorKind::duplicate_id, id,
                             "id '" + id + "' declared in more than one section");
        }
    };

    for (const auto& [id, node] : detail::require_object(doc, "tasks", "$").items()) {
        const std::string path = "tasks." + id;
        declare(id, path);
        if (!node.is_object()) detail::schema_error(path, "expected an object");
        Task task;
        task.id = TaskId{id};
        task.name = detail::require_string(node, "name", path);
        task.description = detail::require_string(node, "description", path);
        for (auto& m : detail::require_string_array(node, "achieved_by", path)) {
            task.achieved_by.emplace_back(std::move(m));
        }
        model.tasks.emplace(task.id, std::move(task));
    }

    for (const auto& [id, node] : detail::require_object(doc, "methods", "$").items()) {
        const std::string path = "methods." + id;
        declare(id, path);
        if (!node.is_object()) detail::schema_error(path, "expected an object");
        Method method;
        method.id = MethodId{id};
        method.name = detail::require_string(node, "name", path);
        method.description = detail::require_string(node, "description", path);
        method.parent_task = TaskId{detail::require_string(node, "parent_task", path)};
        method.states = detail::require_string_array(node, "states", path);
        method.start_state = detail::require_string(node, "start_state", path);
        for (auto& s : detail::require_string_array(node, "terminal_states", path)) {
            method.terminal_states.insert(std::move(s));
        }
        const json& transitions = detail::require(node, "transitions", path);
        if (!transitions.is_array()) detail::schema_error(path + ".transitions", "expected an array");
        std::size_t index = 0;
        for (const auto& tj : transitions) {
            const std::string tpath = path + ".transitions[" + std::to_string(index++) + "]";
            if (!tj.is_object()) detail::schema_error(tpath, "expected an object");
            Transition t;
            t.from = detail::require_string(tj, "from", tpath);
            t.to = detail::require_string(tj, "to", tpath);
            t.description = detail::require_string(tj, "description", tpath);
            const json& ann = detail::require_object(tj, "annotation", tpath);
            const auto kind = detail::require_string(ann, "kind", tpath + ".annotation");
            const auto ref = detail::require_string(ann, "ref", tpath + ".annotation");
            if (kind == "task") {
                t.annotation = SubtaskRef{TaskId{ref}};
            } else if (kind == "knowledge") {
                t.annotation = KnowledgeRef{KnowledgeId{ref}};
            } else {
                detail::schema_error(tpath + ".annotation.kind",
                                     "expected \"task\" or \"knowledge\", got \"" + kind + "\"");
            }
            method.transitions.push_back(std::move(t));
        }
        model.methods.emplace(method.id, std::move(method));
    }

    for (const auto& [id, node] : detail::require_object(doc, "knowledge", "$").items()) {
        const std::string path = "knowledge." + id;
        declare(id, path);
        if (!node.is_object()) detail::schema_error(path, "expected an object");
        KnowledgeEntry entry;
        entry.id = KnowledgeId{id};
        entry.name = detail::require_string(node, "name", path);
        entry.description = detail::require_string(node, "description", path);
        if (auto it = node.find("properties"); it != node.end()) {
            if (!it->is_object()) detail::schema_error(path + ".properties", "expected an object");
            for (const auto& [pname, pdesc] : it->items()) {
                if (!pdesc.is_string()) {
                    detail::schema_error(path + ".properties." + pname, "expected a string");
                }
                entry.properties.emplace(pname, pdesc.get<std::string>());
            }
        }
        model.knowledge.emplace(entry.id, std::move(entry));
    }

    auto dangling = [](const std::string& id, const std::string& where) {
        throw ModelError(ModelErrorKind::dangling_reference, id,
                         where + " references undeclared id '" + id + "'");
    };
    if (!model.find(model.root_task)) dangling(model.root_task.str(), "root_task");
    for (const auto& [id, task] : model.tasks) {
        for (const auto& m : task.achieved_by) {
            if (!model.find(m)) dangling(m.str(), "tasks." + id.str() + ".achieved_by");
        }
    }
    for (const auto& [id, method] : model.methods) {
        if (!model.find(method.parent_task)) {
            dangling(method.parent_task.str(), "methods." + id.str() + ".parent_task");
        }
        for (const auto& t : method.transitions) {
            if (const auto* s = std::get_if<SubtaskRef>(&t.annotation); s && !model.find(s->task)) {
                dangling(s->task.str(), "methods." + id.str() + ".transitions");
            }
            if (const auto* k = std::get_if<KnowledgeRef>(&t.annotation);
                k && !model.find(k->knowledge)) {
                dangling(k->knowledge.str(), "methods." + id.str() + ".transitions");
            }
        }
    }
    return model;
}

inline TmkModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ModelError(ModelErrorKind::io, path.string(), "cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

/// Serializes a model back into document form (2-space indent, fixed key
/// order). parse_model(serialize_model(m)) == m for every parseable m.
inline std::string serialize_model(const TmkModel& model) {
    using oj = nlohmann::ordered_json;
    oj doc;
    doc["agent_name"] = model.agent_name;
    doc["overview"] = model.overview;
    doc["root_task"] = model.root_task.str();

    oj tasks = oj::object();
    for (const auto& [id, task] : model.tasks) {
        oj achieved = oj::array();
        for (const auto& m : task.achieved_by) achieved.push_back(m.str());
        tasks[id.str()] = {{"name", task.name},
                           {"description", task.description},
                           {"achieved_by", achieved}};
    }
    doc["tasks"] = std::move(tasks);

    oj methods = oj::object();
    for (const auto& [id, method] : model.methods) {
        oj transitions = oj::array();
        for (const auto& t : method.transitions) {
            oj ann;
            if (const auto* s = std::get_if<SubtaskRef>(&t.annotation)) {
                ann = {{"kind", "task"}, {"ref", s->task.str()}};
            } else {
                ann = {{"kind", "knowledge"}, {"ref", std::get<KnowledgeRef>(t.annotation).knowledge.str()}};
            }
            transitions.push_back(
                {{"from", t.from}, {"to", t.to}, {"annotation", ann}, {"description", t.description}});
        }
        methods[id.str()] = {{"name", method.name},
                             {"description", method.description},
                             {"parent_task", method.parent_task.str()},
                             {"states", method.states},
                             {"start_state", method.start_state},
                             {"terminal_states", oj(method.terminal_states)},
                             {"transitions", transitions}};
    }
    doc["methods"] = std::move(methods);

    oj knowledge = oj::object();
    for (const auto& [id, entry] : model.knowledge) {
        oj props = oj::object();
        for (const auto& [k, v] : entry.properties) props[k] = v;
        knowledge[id.str()] = {{"name", entry.name},
                               {"description", entry.description},
                               {"properties", props}};
    }
    doc["knowledge"] = std::move(knowledge);
    return doc.dump(2) + "\n";
}

}  // namespace selfex::tmk
