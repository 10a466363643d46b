#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stride/domain.hpp"

namespace stride {

using json = nlohmann::json;

// Canonical JSON forms for every domain type; object keys follow the field
// names of the structs. nlohmann keeps object keys sorted, so dump() output
// is stable — trajectory logs rely on that for byte-identical replays.

void to_json(json& j, const Question& q);
void from_json(const json& j, Question& q);

void to_json(json& j, const Document& d);
void from_json(const json& j, Document& d);

void to_json(json& j, const StrategyStep& s);
void from_json(const json& j, StrategyStep& s);

void to_json(json& j, const SubQuestion& s);
void from_json(const json& j, SubQuestion& s);

void to_json(json& j, const Blueprint& b);
void from_json(const json& j, Blueprint& b);

void to_json(json& j, const Fact& f);
void from_json(const json& j, Fact& f);

void to_json(json& j, const SolvedEntry& e);
void from_json(const json& j, SolvedEntry& e);

void to_json(json& j, const ExecutionState& s);
void from_json(const json& j, ExecutionState& s);

void to_json(json& j, const Directive& d);
void from_json(const json& j, Directive& d);

void to_json(json& j, const ResolutionOutcome& o);
void from_json(const json& j, ResolutionOutcome& o);

void to_json(json& j, const IterationRecord& r);
void from_json(const json& j, IterationRecord& r);

void to_json(json& j, const Metrics& m);
void from_json(const json& j, Metrics& m);

void to_json(json& j, const TokenUsage& u);
void from_json(const json& j, TokenUsage& u);

inline constexpr const char* kTrajectorySchema = "traj_v1";

void to_json(json& j, const Trajectory& t);
void from_json(const json& j, Trajectory& t);

// JSONL helpers. read_jsonl reports the 1-based line number on parse errors.
std::vector<json> read_jsonl(const std::filesystem::path& path);
void append_jsonl(const std::filesystem::path& path, const json& record);

std::vector<Document> load_corpus(const std::filesystem::path& path);
std::vector<Question> load_questions(const std::filesystem::path& path);

}  // namespace stride
