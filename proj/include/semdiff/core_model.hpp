#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace semdiff {

inline constexpr std::string_view kSchemaTag = "semdiff/1";
inline constexpr std::string_view kToolVersion = "0.3.0";
inline constexpr double kTimedOutSentinel = -1.0;

enum class Level { function, program };
enum class VariantKind { optimized, mutated };

std::string_view to_string(Level level);
Level level_from_string(std::string_view text);
std::string_view to_string(VariantKind kind);
VariantKind variant_kind_from_string(std::string_view text);

struct TaskSpec {
  std::string task_id;
  std::string source_benchmark;
  std::optional<std::string> nl_description;
  std::string reference_code;
  Level level = Level::function;
  std::optional<std::string> entry_point;
  std::string binding_program;
  std::optional<std::string> example_input;
};

struct VariantRecord {
  std::string variant_id;
  std::string task_id;
  std::string variant_code;
  VariantKind variant_kind = VariantKind::mutated;
  // Strategy names for optimized variants; "<OP>@<begin>-<end>" for mutants.
  std::vector<std::string> provenance;
  bool parses_ok = false;

  bool operator==(const VariantRecord&) const = default;
};

struct CodePairRecord {
  std::string pair_id;
  std::string task_id;
  std::string code_ori;
  std::string code_var;
  Level level = Level::function;
  std::optional<double> surface_sim;
  std::optional<double> df_score;
  std::optional<std::vector<double>> rep_scores;
  std::map<std::string, double> metric_scores;

  bool operator==(const CodePairRecord&) const = default;
};

struct RegionThresholds {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double y_lo = 0.0;
  double y_hi = 1.0;

  bool operator==(const RegionThresholds&) const = default;
};

struct DatasetHeader {
  std::string schema{kSchemaTag};
  std::string tool_version{kToolVersion};
  std::string config_digest;
  // Only written when set; omitted by default so fixed-seed runs stay
  // byte-identical.
  std::optional<std::string> created;

  bool operator==(const DatasetHeader&) const = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<CodePairRecord> records;

  bool operator==(const Dataset&) const = default;
};

/// One broken rule on a record: the field it concerns and what is wrong.
struct Violation {
  std::string field;
  std::string rule;
};

std::vector<Violation> validate_record(const CodePairRecord& record);
std::vector<Violation> validate_task(const TaskSpec& task);
std::vector<Violation> validate_thresholds(const RegionThresholds& th);
std::vector<Violation> validate_variant(const VariantRecord& variant,
                                        std::string_view reference_code);

nlohmann::ordered_json to_json(const CodePairRecord& record);
nlohmann::ordered_json to_json(const DatasetHeader& header);
nlohmann::ordered_json to_json(const TaskSpec& task);
nlohmann::ordered_json to_json(const VariantRecord& variant);

// The from_json helpers throw SchemaError(line, ...) on missing or
// mistyped fields. They do not check record invariants.
CodePairRecord record_from_json(const nlohmann::json& j, std::size_t line = 0);
DatasetHeader header_from_json(const nlohmann::json& j, std::size_t line = 0);
TaskSpec task_from_json(const nlohmann::json& j, std::size_t line = 0);
VariantRecord variant_from_json(const nlohmann::json& j, std::size_t line = 0);

/// Single-line JSON for a record, as written to the dataset file.
std::string record_line(const CodePairRecord& record);
std::string header_line(const DatasetHeader& header);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Appends one record line to an existing dataset file (checkpointing).
void append_record(const CodePairRecord& record,
                   const std::filesystem::path& path);

std::vector<TaskSpec> load_tasks(const std::filesystem::path& path);
void save_tasks(const std::vector<TaskSpec>& tasks,
                const std::filesystem::path& path);
std::vector<VariantRecord> load_variants(const std::filesystem::path& path);
void save_variants(const std::vector<VariantRecord>& variants,
                   const std::filesystem::path& path);

}  // namespace semdiff
