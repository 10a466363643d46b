#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stride/domain.hpp"

namespace stride {

// Named prompt templates with {slot} substitution. Built-in defaults cover
// every role; a template directory can override any of them by file name
// (e.g. "supervisor_user.txt" overrides the "supervisor_user" template).
class PromptLibrary {
public:
    PromptLibrary();
    explicit PromptLibrary(const std::filesystem::path& template_dir);

    const std::string& raw(const std::string& name) const;

    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& slots) const;

    static const std::vector<std::pair<std::string, std::string>>& defaults();

private:
    std::map<std::string, std::string> templates_;
};

// Shared line formats. The scripted test providers anchor their matchers on
// these, so they are part of the engine's wire contract.
std::string format_id_set(const std::set<int>& ids);                       // "[1, 2]"
std::string format_plan_lines(const std::vector<SubQuestion>& plan);
std::string format_solved_lines(const ExecutionState& state);
std::string format_failed_section(const ExecutionState& state);
std::string format_document_blocks(const std::vector<Document>& docs);     // "[doc id] title: text"
std::string format_fact_lines(const std::vector<Fact>& facts);

}  // namespace stride
