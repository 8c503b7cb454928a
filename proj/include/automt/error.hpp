#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace automt
{

// Every failure raised by the engine carries a stable machine-readable code.
// The CLI maps Error to exit code 1 (pipeline) or 2 (usage/IO) via exit_code().
class Error : public std::runtime_error
{
public:
  Error(std::string code, const std::string & message)
  : std::runtime_error(message), code_(std::move(code))
  {
  }

  const std::string & code() const noexcept { return code_; }
  virtual int exit_code() const noexcept { return 1; }

private:
  std::string code_;
};

#define AUTOMT_DEFINE_ERROR(Name, code_str)                                   \
  class Name : public Error                                                   \
  {                                                                           \
  public:                                                                     \
    explicit Name(const std::string & message) : Error(code_str, message) {} \
  }

AUTOMT_DEFINE_ERROR(ParseError, "parse_error");
AUTOMT_DEFINE_ERROR(DuplicateEntry, "duplicate_entry");
AUTOMT_DEFINE_ERROR(EmptyCategory, "empty_category");
AUTOMT_DEFINE_ERROR(GrammarError, "grammar_error");
AUTOMT_DEFINE_ERROR(VerbMismatch, "verb_mismatch");
AUTOMT_DEFINE_ERROR(InvalidMr, "invalid_mr");
AUTOMT_DEFINE_ERROR(ArityError, "arity_error");
AUTOMT_DEFINE_ERROR(PreconditionError, "precondition_violation");
AUTOMT_DEFINE_ERROR(BackendUnavailable, "backend_unavailable");
AUTOMT_DEFINE_ERROR(Timeout, "timeout");
AUTOMT_DEFINE_ERROR(MalformedJudgement, "malformed_judgement");
AUTOMT_DEFINE_ERROR(DimensionMismatch, "dimension_mismatch");
AUTOMT_DEFINE_ERROR(UnknownIndex, "unknown_index");
AUTOMT_DEFINE_ERROR(MalformedSceneReply, "malformed_scene_reply");
AUTOMT_DEFINE_ERROR(NoApplicableMr, "no_applicable_mr");
AUTOMT_DEFINE_ERROR(EditRejected, "edit_rejected");
AUTOMT_DEFINE_ERROR(VideoRejected, "video_rejected");
AUTOMT_DEFINE_ERROR(ProtocolError, "protocol_error");
AUTOMT_DEFINE_ERROR(EmptyBatch, "empty_batch");
AUTOMT_DEFINE_ERROR(EmptySeries, "empty_series");
AUTOMT_DEFINE_ERROR(TooFewPredictors, "too_few_predictors");
AUTOMT_DEFINE_ERROR(UnknownBehavior, "unknown_behavior");
AUTOMT_DEFINE_ERROR(DegenerateMarginals, "degenerate_marginals");
AUTOMT_DEFINE_ERROR(MissingStage, "missing_stage");
AUTOMT_DEFINE_ERROR(ConfigError, "config_error");

#undef AUTOMT_DEFINE_ERROR

class IoError : public Error
{
public:
  explicit IoError(const std::string & message) : Error("io_error", message) {}
  int exit_code() const noexcept override { return 2; }
};

class UsageError : public Error
{
public:
  explicit UsageError(const std::string & message) : Error("usage_error", message) {}
  int exit_code() const noexcept override { return 2; }
};

// Which MR slot failed ontology membership, plus the offending value.
class OntologyViolation : public Error
{
public:
  OntologyViolation(std::string slot, std::string value)
  : Error("ontology_violation", "'" + value + "' is not a member of the " + slot + " vocabulary"),
    slot_(std::move(slot)),
    value_(std::move(value))
  {
  }

  const std::string & slot() const noexcept { return slot_; }
  const std::string & value() const noexcept { return value_; }

private:
  std::string slot_;
  std::string value_;
};

}  // namespace automt
