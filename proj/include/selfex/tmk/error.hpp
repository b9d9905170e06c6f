#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace selfex::tmk {

enum class ModelErrorKind {
    syntax,              // not well-formed JSON
    schema,              // missing/mistyped field or malformed id
    duplicate_id,        // id declared twice
    dangling_reference,  // reference to an id that is not declared
    io,                  // file could not be read
};

inline std::string_view to_string(ModelErrorKind kind) {
    switch (kind) {
        case ModelErrorKind::syntax: return "syntax";
        case ModelErrorKind::schema: return "schema";
        case ModelErrorKind::duplicate_id: return "duplicate-id";
        case ModelErrorKind::dangling_reference: return "dangling-reference";
        case ModelErrorKind::io: return "io";
    }
    return "unknown";
}

/// Raised when a model document cannot be turned into a TmkModel.
/// `subject` carries the offending id or field path; line/column are
/// 1-based and only set for syntax errors.
class ModelError : public std::runtime_error {
public:
    ModelError(ModelErrorKind kind, std::string subject, const std::string& message,
               std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind), subject_(std::move(subject)), line_(line), column_(column) {}

    ModelErrorKind kind() const noexcept { return kind_; }
    const std::string& subject() const noexcept { return subject_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    ModelErrorKind kind_;
    std::string subject_;
    std::size_t line_;
    std::size_t column_;
};

/// compute_layers on a model whose decomposition graph has a cycle.
class CycleError : public std::logic_error {
public:
    explicit CycleError(const std::string& task_id)
        : std::logic_error("decomposition cycle through task '" + task_id + "'"), task_id_(task_id) {}
    const std::string& task_id() const noexcept { return task_id_; }

private:
    std::string task_id_;
};

}  // namespace selfex::tmk
