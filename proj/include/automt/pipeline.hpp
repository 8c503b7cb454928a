#pragma once

#include "automt/backends/client.hpp"
#include "automt/config.hpp"
#include "automt/extraction.hpp"
#include "automt/oracle.hpp"
#include "automt/stats.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace automt::pipeline
{

// Run-directory layout shared by every stage.
namespace files
{
inline constexpr const char * kExtractionRecords = "extraction_records.jsonl";
inline constexpr const char * kMrs = "mrs.jsonl";
inline constexpr const char * kStore = "store";
inline constexpr const char * kRepresentations = "representations.jsonl";
inline constexpr const char * kAnalyzeSkipped = "analyze_skipped.jsonl";
inline constexpr const char * kGenerateStore = "generate/store";
inline constexpr const char * kFollowups = "followups";
inline constexpr const char * kManifest = "manifest.jsonl";
inline constexpr const char * kGenerateSkipped = "generate_skipped.jsonl";
inline constexpr const char * kVerdicts = "validation_verdicts.jsonl";
inline constexpr const char * kTranscripts = "validation_transcripts.jsonl";
inline constexpr const char * kValidationSummary = "validation_summary.json";
inline constexpr const char * kViolations = "violation_verdicts.jsonl";
inline constexpr const char * kViolationSummary = "violation_summary.json";
inline constexpr const char * kReportJson = "report.json";
inline constexpr const char * kReportMarkdown = "report.md";
inline constexpr const char * kEffectiveConfig = "effective_config.toml";
}  // namespace files

inline constexpr const char * kMockTimestamp = "1970-01-01T00:00:00Z";

using ClientPtr = std::shared_ptr<backends::BackendClient>;

struct Backends
{
  ClientPtr chat;
  ClientPtr vision;
  ClientPtr embed;
  ClientPtr edit;
  ClientPtr video;
  ClientPtr validator;
  std::vector<extraction::ParserProfile> parsers;
  std::vector<std::pair<std::string, ClientPtr>> ads;
};

Backends connect(const config::RunConfig & config);

/// Shared state of one CLI invocation.
struct RunContext
{
  config::RunConfig config;
  std::filesystem::path run_dir;
  Backends backends;
  bool force = false;
  std::string created_at;  // fixed epoch when every backend is a mock
  std::ostream * log = nullptr;

  void note(const std::string & message) const;
};

RunContext make_context(config::RunConfig config, bool force, std::ostream * log = nullptr);

// Each stage reads its inputs from the run directory, writes its outputs
// there, skips work whose outputs already exist unless forced, and returns a
// short JSON report.
nlohmann::json run_extract(RunContext & ctx, const std::filesystem::path & rules_file);
nlohmann::json run_build_store(RunContext & ctx);
nlohmann::json run_analyze(RunContext & ctx);
nlohmann::json run_generate(RunContext & ctx);
nlohmann::json run_validate(RunContext & ctx);
nlohmann::json run_evaluate(RunContext & ctx);

/// Per-ADS verdicts for one follow-up: bands from every ADS on the source
/// frames, then each ADS judged on the follow-up frames.
std::vector<oracle::ViolationVerdict> evaluate_followup(
  const std::string & case_id, std::span<const Image> source_frames, std::span<const Image> followup_frames,
  std::string_view expected_behavior, std::span<const std::pair<std::string, ClientPtr>> ads, double band_k,
  oracle::SignConvention convention);

struct ReportInputs
{
  std::optional<std::filesystem::path> ratings;
  int categories = 5;
  stats::KappaWeights weights = stats::KappaWeights::Linear;
  std::optional<std::filesystem::path> samples_a;
  std::optional<std::filesystem::path> samples_b;
};

/// Aggregates the verdict files of a run into report.json and report.md.
/// Throws MissingStage when a stage output is absent.
nlohmann::json run_report(
  const std::filesystem::path & run_dir, const std::string & label, const ReportInputs & inputs = {});

std::string render_markdown(const nlohmann::json & report);

}  // namespace automt::pipeline
