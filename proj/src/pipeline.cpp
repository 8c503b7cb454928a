#include "automt/pipeline.hpp"

#include "automt/backends/factory.hpp"
#include "automt/error.hpp"
#include "automt/followup.hpp"
#include "automt/io.hpp"
#include "automt/mr_store.hpp"
#include "automt/ontology.hpp"
#include "automt/parallel.hpp"
#include "automt/scene.hpp"
#include "automt/text.hpp"
#include "automt/validation.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <set>

namespace automt::pipeline
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

ClientPtr client_for(const config::RunConfig & cfg, const std::string & id, const std::string & url, backends::BackendKind kind)
{
  return backends::make_client(config::endpoint(cfg, id, url, kind), cfg.seed);
}

std::string utc_now()
{
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require(const fs::path & path, const char * stage)
{
  if (!fs::exists(path)) {
    throw MissingStage("'" + path.filename().string() + "' not found; run the " + std::string(stage) + " stage first");
  }
}

void write_snapshot(const RunContext & ctx)
{
  fs::create_directories(ctx.run_dir);
  io::write_file_atomic(ctx.run_dir / files::kEffectiveConfig, config::snapshot(ctx.config));
}

ontology::OntologyTaxonomy taxonomy_of(const RunContext & ctx)
{
  if (ctx.config.taxonomy.empty()) throw ConfigError("no taxonomy configured");
  return ontology::load_taxonomy_file(ctx.config.resolve(ctx.config.taxonomy));
}

fs::path corpus_of(const RunContext & ctx)
{
  if (ctx.config.corpus.empty()) throw ConfigError("no corpus configured");
  return ctx.config.resolve(ctx.config.corpus);
}

std::map<std::string, json> rows_by_case(const fs::path & path)
{
  std::map<std::string, json> rows;
  if (!fs::exists(path)) return rows;
  for (auto & row : io::read_jsonl(path)) rows[row.at("case_id").get<std::string>()] = row;
  return rows;
}

json skipped_row(const std::string & case_id, const Error & e)
{
  return json{{"case_id", case_id}, {"code", e.code()}, {"message", e.what()}};
}

// Errors that abort a stage; any other Error is recorded against its case.
bool fatal(const Error & e)
{
  return e.code() == "backend_unavailable" || e.code() == "timeout" || e.code() == "config_error" ||
         e.code() == "io_error";
}

template <typename Fn>
auto guarded(Fn && fn) -> decltype(fn())
{
  try {
    return fn();
  } catch (const Timeout & e) {
    throw BackendUnavailable(e.what());
  }
}

oracle::SignConvention convention_of(const config::RunConfig & cfg)
{
  return cfg.sign_convention == "left_negative" ? oracle::SignConvention::LeftNegative
                                                : oracle::SignConvention::LeftPositive;
}

std::vector<json> manifest_rows(const fs::path & run_dir)
{
  require(run_dir / files::kManifest, "generate");
  return io::read_jsonl(run_dir / files::kManifest);
}

json nullable(std::optional<double> v)
{
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void RunContext::note(const std::string & message) const
{
  if (log) *log << message << '\n';
}

Backends connect(const config::RunConfig & cfg)
{
  using backends::BackendKind;
  Backends b;
  b.chat = client_for(cfg, "chat", cfg.backends.at("chat"), BackendKind::Chat);
  b.vision = client_for(cfg, "vision", cfg.backends.at("vision"), BackendKind::Vision);
  b.embed = client_for(cfg, "embed", cfg.backends.at("embed"), BackendKind::Embed);
  b.edit = client_for(cfg, "edit", cfg.backends.at("edit"), BackendKind::Edit);
  b.video = client_for(cfg, "video", cfg.backends.at("video"), BackendKind::Video);
  b.validator = client_for(cfg, "validator", cfg.backends.at("validator"), BackendKind::Chat);
  for (const auto & [name, url] : cfg.parsers) {
    extraction::ParserProfile profile;
    profile.name = name;
    profile.backend = client_for(cfg, "parser." + name, url, BackendKind::Chat);
    b.parsers.push_back(std::move(profile));
  }
  for (const auto & [name, url] : cfg.ads) {
    b.ads.emplace_back(name, client_for(cfg, "ads." + name, url, BackendKind::Predict));
  }
  return b;
}

RunContext make_context(config::RunConfig cfg, bool force, std::ostream * log)
{
  config::validate(cfg);
  RunContext ctx;
  ctx.run_dir = cfg.resolve(cfg.output);
  ctx.backends = connect(cfg);
  ctx.created_at = cfg.all_mock() ? kMockTimestamp : utc_now();
  ctx.config = std::move(cfg);
  ctx.force = force;
  ctx.log = log;
  return ctx;
}

json run_extract(RunContext & ctx, const fs::path & rules_file)
{
  const auto records_path = ctx.run_dir / files::kExtractionRecords;
  const auto mrs_path = ctx.run_dir / files::kMrs;
  auto rules = extraction::read_rules(rules_file);
  if (!ctx.force && fs::exists(records_path) && fs::exists(mrs_path)) {
    ctx.note("extract: outputs exist, skipping (use --force to rerun)");
    return json{{"stage", "extract"}, {"skipped", true}};
  }
  auto taxonomy = taxonomy_of(ctx);
  write_snapshot(ctx);

  extraction::ExtractionOptions options;
  options.system_name = ctx.config.system_name;
  options.acceptance_threshold = ctx.config.thresholds.acceptance_score;
  options.parallelism = ctx.config.parallel;
  auto records = guarded([&] {
    return extraction::extract_corpus(rules, ctx.backends.parsers, taxonomy, *ctx.backends.validator, options);
  });
  for (auto & record : records) record.region = ctx.config.region;

  std::vector<json> record_rows;
  for (const auto & record : records) record_rows.push_back(extraction::to_json(record, ctx.config.system_name));
  auto mrs = extraction::winners(records);
  std::vector<json> mr_rows;
  for (auto & mr : mrs) {
    mr.region = ctx.config.region;
    mr_rows.push_back(mr::to_record(mr, ctx.config.system_name));
  }
  io::write_jsonl(records_path, record_rows);
  io::write_jsonl(mrs_path, mr_rows);
  ctx.note("extract: " + std::to_string(records.size()) + " rules, " + std::to_string(mrs.size()) + " accepted MRs");
  return json{
    {"stage", "extract"}, {"rules", records.size()}, {"accepted", mrs.size()},
    {"rejected", records.size() - mrs.size()}, {"candidates_per_rule", ctx.backends.parsers.size()}};
}

json run_build_store(RunContext & ctx)
{
  const auto store_dir = ctx.run_dir / files::kStore;
  if (!ctx.force && fs::exists(store_dir / store::kCsvName)) {
    ctx.note("build-store: store exists, skipping (use --force to rebuild)");
    return json{{"stage", "build-store"}, {"skipped", true}};
  }
  require(ctx.run_dir / files::kMrs, "extract");
  std::vector<mr::MetamorphicRelation> mrs;
  for (const auto & row : io::read_jsonl(ctx.run_dir / files::kMrs)) mrs.push_back(mr::from_record(row));
  if (mrs.empty()) throw EmptyBatch("no accepted MRs to store");
  write_snapshot(ctx);
  auto built = guarded([&] { return store::MrStore::build(mrs, *ctx.backends.embed, ctx.config.system_name); });
  built.save(store_dir);
  ctx.note("build-store: " + std::to_string(built.size()) + " MRs, dimension " + std::to_string(built.dimension()));
  return json{{"stage", "build-store"}, {"mrs", built.size()}, {"dimension", built.dimension()}};
}

json run_analyze(RunContext & ctx)
{
  const auto corpus = corpus_of(ctx);
  const auto reps_path = ctx.run_dir / files::kRepresentations;
  const auto skipped_path = ctx.run_dir / files::kAnalyzeSkipped;
  auto ids = scene::list_cases(corpus);
  std::map<std::string, json> done, skipped;
  if (!ctx.force) {
    done = rows_by_case(reps_path);
    skipped = rows_by_case(skipped_path);
  }
  std::vector<std::string> pending;
  for (const auto & id : ids) {
    if (!done.count(id) && !skipped.count(id)) pending.push_back(id);
  }
  write_snapshot(ctx);

  struct Outcome
  {
    std::optional<json> rep;
    std::optional<json> skip;
  };
  auto outcomes = parallel_map(pending.size(), ctx.config.parallel, [&](std::size_t i) {
    Outcome out;
    try {
      auto test_case = scene::load_case(corpus / pending[i], ctx.config.region);
      auto fields = guarded([&] { return scene::analyze_scene(test_case, *ctx.backends.vision, ctx.config.frame_cap); });
      out.rep = scene::to_json(scene::build_representation(test_case, fields));
    } catch (const Error & e) {
      if (fatal(e)) throw;
      out.skip = skipped_row(pending[i], e);
    }
    return out;
  });
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (outcomes[i].rep) done[pending[i]] = *outcomes[i].rep;
    if (outcomes[i].skip) skipped[pending[i]] = *outcomes[i].skip;
  }
  std::vector<json> rep_rows, skip_rows;
  for (const auto & id : ids) {
    if (auto it = done.find(id); it != done.end()) rep_rows.push_back(it->second);
    if (auto it = skipped.find(id); it != skipped.end()) skip_rows.push_back(it->second);
  }
  io::write_jsonl(reps_path, rep_rows);
  if (!skip_rows.empty() || fs::exists(skipped_path)) io::write_jsonl(skipped_path, skip_rows);
  ctx.note("analyze: " + std::to_string(pending.size()) + " analyzed, " + std::to_string(ids.size() - pending.size()) +
           " already present");
  return json{
    {"stage", "analyze"}, {"cases", ids.size()}, {"analyzed", pending.size()}, {"representations", rep_rows.size()},
    {"skipped", skip_rows.size()}};
}

json run_generate(RunContext & ctx)
{
  const auto corpus = corpus_of(ctx);
  require(ctx.run_dir / files::kRepresentations, "analyze");
  require(ctx.run_dir / files::kStore / store::kCsvName, "build-store");
  const auto followups_dir = ctx.run_dir / files::kFollowups;
  const auto work_store_dir = ctx.run_dir / files::kGenerateStore;
  const auto skipped_path = ctx.run_dir / files::kGenerateSkipped;
  if (ctx.force) {
    fs::remove_all(followups_dir);
    fs::remove_all(work_store_dir);
    fs::remove(skipped_path);
    fs::remove(ctx.run_dir / files::kManifest);
  }
  write_snapshot(ctx);
  if (!fs::exists(work_store_dir / store::kCsvName)) {
    store::MrStore::load(ctx.run_dir / files::kStore).save(work_store_dir);
  }
  auto mr_store = store::MrStore::load(work_store_dir);
  mr_store.attach(work_store_dir);

  std::vector<scene::TestCaseRepresentation> reps;
  for (const auto & row : io::read_jsonl(ctx.run_dir / files::kRepresentations)) reps.push_back(scene::from_json(row));
  auto skipped = rows_by_case(skipped_path);
  auto has_artifact = [&](const std::string & id) { return fs::exists(followups_dir / id / "lineage.json"); };

  followup::MatchOptions match_options;
  match_options.top_k = ctx.config.thresholds.top_k;
  match_options.thresholds = {ctx.config.thresholds.v_min, ctx.config.thresholds.epsilon};

  // Sequential: each match updates the execution counts the next one sees.
  struct Job
  {
    std::string case_id;
    followup::MatchResult match;
  };
  std::vector<Job> jobs;
  for (const auto & rep : reps) {
    if (has_artifact(rep.case_id) || skipped.count(rep.case_id)) continue;
    try {
      auto match = guarded([&] {
        return followup::match_mr(rep, mr_store, *ctx.backends.chat, *ctx.backends.embed, match_options);
      });
      jobs.push_back(Job{rep.case_id, std::move(match)});
    } catch (const Error & e) {
      if (fatal(e)) throw;
      skipped[rep.case_id] = skipped_row(rep.case_id, e);
    }
  }

  const auto hash = config::config_hash(ctx.config);
  auto outcomes = parallel_map(jobs.size(), ctx.config.parallel, [&](std::size_t i) -> std::optional<json> {
    const auto & job = jobs[i];
    try {
      auto test_case = scene::load_case(corpus / job.case_id, ctx.config.region);
      auto entry = mr_store.entry(job.match.mr_index);
      auto plan = followup::plan_manipulation(entry.mr);
      auto artifact = guarded([&] {
        return followup::generate_followup(test_case, plan, job.match.mr_index, *ctx.backends.edit, *ctx.backends.video);
      });
      artifact.lineage["config_hash"] = hash;
      artifact.lineage["created_at"] = ctx.created_at;
      artifact.lineage["match"] = json{
        {"rationale", job.match.rationale}, {"fallback", job.match.fallback},
        {"execution_count", job.match.execution_count}, {"survivors", job.match.survivors}};
      followup::write_artifact(followups_dir / job.case_id, artifact);
      return std::nullopt;
    } catch (const Error & e) {
      if (fatal(e)) throw;
      return skipped_row(job.case_id, e);
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i]) skipped[jobs[i].case_id] = *outcomes[i];
  }

  std::vector<json> manifest, skip_rows;
  for (const auto & rep : reps) {
    if (has_artifact(rep.case_id)) {
      auto lineage = json::parse(io::read_file(followups_dir / rep.case_id / "lineage.json"));
      auto plan = json::parse(io::read_file(followups_dir / rep.case_id / "plan.json"));
      manifest.push_back(json{
        {"case_id", rep.case_id},
        {"artifact", (fs::path(files::kFollowups) / rep.case_id).generic_string()},
        {"mr_index", lineage.at("mr_index")},
        {"manipulation", plan.at("instruction")}});
    } else if (auto it = skipped.find(rep.case_id); it != skipped.end()) {
      skip_rows.push_back(it->second);
    }
  }
  io::write_jsonl(ctx.run_dir / files::kManifest, manifest);
  if (!skip_rows.empty() || fs::exists(skipped_path)) io::write_jsonl(skipped_path, skip_rows);
  ctx.note("generate: " + std::to_string(jobs.size()) + " new follow-ups attempted, " +
           std::to_string(manifest.size()) + " in manifest");
  return json{
    {"stage", "generate"}, {"attempted", jobs.size()}, {"followups", manifest.size()}, {"skipped", skip_rows.size()}};
}

json run_validate(RunContext & ctx)
{
  const auto corpus = corpus_of(ctx);
  auto manifest = manifest_rows(ctx.run_dir);
  require(ctx.run_dir / files::kStore / store::kCsvName, "build-store");
  auto mr_store = store::MrStore::load(ctx.run_dir / files::kStore);
  const auto verdicts_path = ctx.run_dir / files::kVerdicts;
  const auto transcripts_path = ctx.run_dir / files::kTranscripts;
  std::map<std::string, json> done, transcripts;
  if (!ctx.force) {
    done = rows_by_case(verdicts_path);
    transcripts = rows_by_case(transcripts_path);
  }
  std::vector<json> pending;
  for (const auto & row : manifest) {
    if (!done.count(row.at("case_id").get<std::string>())) pending.push_back(row);
  }
  write_snapshot(ctx);

  auto judged = parallel_map(pending.size(), ctx.config.parallel, [&](std::size_t i) {
    const auto & row = pending[i];
    const auto case_id = row.at("case_id").get<std::string>();
    const auto mr_index = row.at("mr_index").get<std::size_t>();
    auto source = scene::load_case(corpus / case_id, ctx.config.region);
    auto artifact = followup::read_artifact(ctx.run_dir / row.at("artifact").get<std::string>());
    auto mr = mr_store.entry(mr_index).mr;

    std::vector<validation::JudgeTranscript> log;
    auto metric = [&](const char * name, auto && fn) {
      std::string reply;
      try {
        int bit = guarded([&] { return fn(&reply); });
        log.push_back({name, reply});
        return bit;
      } catch (const MalformedJudgement & e) {
        log.push_back({name, reply.empty() ? std::string("error: ") + e.what() : reply});
        return 0;
      }
    };
    int scenario = metric("scenario_alignment", [&](std::string * out) {
      return validation::scenario_alignment(source.frames, artifact.frames, *ctx.backends.vision, out);
    });
    int logical = metric("logical_alignment", [&](std::string * out) {
      return validation::logical_alignment(mr, *ctx.backends.validator, ctx.config.system_name, out);
    });
    int manipulation = metric("manipulation_verification", [&](std::string * out) {
      return validation::manipulation_verification(
        source.frames.front(), artifact.edited_keyframe, artifact.plan.instruction, *ctx.backends.vision, out);
    });
    auto verdict = validation::make_verdict(case_id, mr_index, scenario, logical, manipulation);
    verdict.transcripts = std::move(log);
    return verdict;
  });
  for (const auto & v : judged) {
    done[v.case_id] = validation::to_json(v);
    transcripts[v.case_id] = validation::transcripts_json(v);
  }

  std::vector<json> verdict_rows, transcript_rows;
  std::vector<validation::ValidityVerdict> verdicts;
  std::vector<std::string> valid_phrases;
  for (const auto & row : manifest) {
    auto id = row.at("case_id").get<std::string>();
    verdict_rows.push_back(done.at(id));
    if (transcripts.count(id)) transcript_rows.push_back(transcripts.at(id));
    verdicts.push_back(validation::verdict_from_json(done.at(id)));
    if (verdicts.back().valid) valid_phrases.push_back(row.value("manipulation", std::string{}));
  }
  io::write_jsonl(verdicts_path, verdict_rows);
  io::write_jsonl(transcripts_path, transcript_rows);

  json summary;
  if (verdicts.empty()) {
    summary = json{
      {"total", 0}, {"valid", 0}, {"validation_rate", nullptr}, {"scenario_alignment_rate", nullptr},
      {"logical_alignment_rate", nullptr}, {"manipulation_verification_rate", nullptr}};
  } else {
    summary = validation::to_json(validation::summarize(verdicts));
  }
  summary["label"] = ctx.config.label;
  summary["diversity"] = validation::to_json(validation::distinct_manipulations(valid_phrases));
  io::write_file_atomic(ctx.run_dir / files::kValidationSummary, io::dump_pretty(summary));
  ctx.note("validate: " + std::to_string(pending.size()) + " judged, " + std::to_string(valid_phrases.size()) + " of " +
           std::to_string(verdicts.size()) + " valid");
  return json{{"stage", "validate"}, {"judged", pending.size()}, {"total", verdicts.size()}, {"valid", valid_phrases.size()}};
}

std::vector<oracle::ViolationVerdict> evaluate_followup(
  const std::string & case_id, std::span<const Image> source_frames, std::span<const Image> followup_frames,
  std::string_view expected_behavior, std::span<const std::pair<std::string, ClientPtr>> ads, double band_k,
  oracle::SignConvention convention)
{
  auto behavior = oracle::behavior_from_string(expected_behavior);
  auto summary_of = [&](const std::pair<std::string, ClientPtr> & a, std::span<const Image> frames) {
    auto telemetry = guarded([&] { return a.second->predict(frames); });
    return oracle::summarize(oracle::PredictionSeries{a.first, case_id, telemetry.speed_mps, telemetry.steering_rad});
  };
  std::vector<oracle::Summary> source;
  for (const auto & a : ads) source.push_back(summary_of(a, source_frames));
  auto bands = oracle::bands_from_source(source, band_k);
  std::vector<oracle::ViolationVerdict> verdicts;
  for (const auto & a : ads) {
    auto v = oracle::judge(behavior, summary_of(a, followup_frames), bands, convention);
    v.ads_id = a.first;
    v.case_id = case_id;
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

json run_evaluate(RunContext & ctx)
{
  const auto corpus = corpus_of(ctx);
  auto manifest = manifest_rows(ctx.run_dir);
  require(ctx.run_dir / files::kVerdicts, "validate");
  require(ctx.run_dir / files::kStore / store::kCsvName, "build-store");
  if (ctx.backends.ads.size() < 2) throw TooFewPredictors("evaluation needs at least two configured ADSs");
  auto mr_store = store::MrStore::load(ctx.run_dir / files::kStore);
  auto validity = rows_by_case(ctx.run_dir / files::kVerdicts);
  const auto violations_path = ctx.run_dir / files::kViolations;

  std::map<std::string, std::vector<json>> done;
  if (!ctx.force && fs::exists(violations_path)) {
    for (auto & row : io::read_jsonl(violations_path)) done[row.at("case_id").get<std::string>()].push_back(row);
  }
  std::vector<json> valid_rows, pending;
  for (const auto & row : manifest) {
    auto id = row.at("case_id").get<std::string>();
    auto it = validity.find(id);
    if (it == validity.end() || !it->second.at("valid").get<bool>()) continue;
    valid_rows.push_back(row);
    if (!done.count(id)) pending.push_back(row);
  }
  write_snapshot(ctx);

  const auto convention = convention_of(ctx.config);
  auto results = parallel_map(pending.size(), ctx.config.parallel, [&](std::size_t i) {
    const auto & row = pending[i];
    auto case_id = row.at("case_id").get<std::string>();
    auto source = scene::load_case(corpus / case_id, ctx.config.region);
    auto artifact = followup::read_artifact(ctx.run_dir / row.at("artifact").get<std::string>());
    auto behavior = mr_store.entry(row.at("mr_index").get<std::size_t>()).mr.expected_behavior;
    return evaluate_followup(
      case_id, source.frames, artifact.frames, behavior, ctx.backends.ads, ctx.config.thresholds.band_k, convention);
  });
  for (const auto & verdicts : results) {
    for (const auto & v : verdicts) done[v.case_id].push_back(oracle::to_json(v));
  }

  std::vector<json> rows;
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // ads -> (violations, total)
  for (const auto & row : valid_rows) {
    for (const auto & v : done.at(row.at("case_id").get<std::string>())) {
      rows.push_back(v);
      auto & t = tally[v.at("ads_id").get<std::string>()];
      t.first += v.at("violated").get<bool>() ? 1 : 0;
      t.second += 1;
    }
  }
  io::write_jsonl(violations_path, rows);

  json per_ads = json::array();
  for (const auto & [name, client] : ctx.backends.ads) {
    auto t = tally[name];
    std::optional<double> rate;
    if (t.second > 0) rate = static_cast<double>(t.first) / static_cast<double>(t.second);
    per_ads.push_back(json{{"ads_id", name}, {"violations", t.first}, {"total", t.second}, {"violation_rate", nullable(rate)}});
  }
  json summary{
    {"label", ctx.config.label},
    {"valid_followups", valid_rows.size()},
    {"band_k", ctx.config.thresholds.band_k},
    {"sign_convention", ctx.config.sign_convention},
    {"per_ads", per_ads}};
  io::write_file_atomic(ctx.run_dir / files::kViolationSummary, io::dump_pretty(summary));
  ctx.note("evaluate: " + std::to_string(pending.size()) + " follow-ups evaluated across " +
           std::to_string(ctx.backends.ads.size()) + " ADSs");
  return json{{"stage", "evaluate"}, {"evaluated", pending.size()}, {"valid_followups", valid_rows.size()}};
}

json run_report(const fs::path & run_dir, const std::string & label, const ReportInputs & inputs)
{
  require(run_dir / files::kManifest, "generate");
  require(run_dir / files::kVerdicts, "validate");
  require(run_dir / files::kViolationSummary, "evaluate");
  require(run_dir / files::kViolations, "evaluate");

  std::map<std::string, std::string> phrase_of;
  for (const auto & row : io::read_jsonl(run_dir / files::kManifest)) {
    phrase_of[row.at("case_id").get<std::string>()] = row.value("manipulation", std::string{});
  }
  std::vector<validation::ValidityVerdict> verdicts;
  std::vector<std::string> valid_phrases;
  for (const auto & row : io::read_jsonl(run_dir / files::kVerdicts)) {
    verdicts.push_back(validation::verdict_from_json(row));
    if (verdicts.back().valid) {
      auto it = phrase_of.find(verdicts.back().case_id);
      if (it == phrase_of.end()) throw ParseError("verdict for '" + verdicts.back().case_id + "' has no manifest entry");
      valid_phrases.push_back(it->second);
    }
  }

  json validation_row{{"method", label}, {"total", verdicts.size()}};
  if (verdicts.empty()) {
    validation_row["valid"] = 0;
    for (auto key : {"scenario_alignment_rate", "logical_alignment_rate", "manipulation_verification_rate", "validation_rate"}) {
      validation_row[key] = nullptr;
    }
  } else {
    auto s = validation::summarize(verdicts);
    validation_row["valid"] = s.valid;
    validation_row["scenario_alignment_rate"] = s.scenario_alignment_rate;
    validation_row["logical_alignment_rate"] = s.logical_alignment_rate;
    validation_row["manipulation_verification_rate"] = s.manipulation_verification_rate;
    validation_row["validation_rate"] = s.validation_rate;
  }

  // Per-ADS rates recomputed from the verdict rows, in configured ADS order.
  auto violation_summary = json::parse(io::read_file(run_dir / files::kViolationSummary));
  std::vector<std::string> ads_order;
  for (const auto & a : violation_summary.at("per_ads")) ads_order.push_back(a.at("ads_id").get<std::string>());
  std::map<std::string, std::vector<oracle::ViolationVerdict>> by_ads;
  for (const auto & row : io::read_jsonl(run_dir / files::kViolations)) {
    oracle::ViolationVerdict v;
    v.ads_id = row.at("ads_id").get<std::string>();
    v.case_id = row.at("case_id").get<std::string>();
    v.violated = row.at("violated").get<bool>();
    if (std::find(ads_order.begin(), ads_order.end(), v.ads_id) == ads_order.end()) ads_order.push_back(v.ads_id);
    by_ads[v.ads_id].push_back(std::move(v));
  }
  json rates = json::object();
  json counts = json::object();
  for (const auto & id : ads_order) {
    const auto & vs = by_ads[id];
    rates[id] = vs.empty() ? json(nullptr) : json(oracle::violation_rate(vs));
    std::size_t violated = 0;
    for (const auto & v : vs) violated += v.violated ? 1 : 0;
    counts[id] = json{{"violations", violated}, {"total", vs.size()}};
  }

  json report{
    {"label", label},
    {"validation", {{"rows", json::array({validation_row})}}},
    {"violations", {{"ads", ads_order}, {"rows", json::array({json{{"method", label}, {"rates", rates}, {"counts", counts}}})}}},
    {"diversity", validation::to_json(validation::distinct_manipulations(valid_phrases))},
    {"stats", json::object()}};

  if (inputs.ratings) {
    auto table = stats::parse_rating_csv(io::read_file(*inputs.ratings), inputs.categories);
    report["stats"]["kappa"] = json{
      {"kappa", stats::weighted_fleiss_kappa(table, inputs.weights)},
      {"weights", inputs.weights == stats::KappaWeights::Linear ? "linear" : "quadratic"},
      {"items", table.ratings.size()},
      {"raters", table.ratings.front().size()}};
  }
  if (inputs.samples_a || inputs.samples_b) {
    if (!inputs.samples_a || !inputs.samples_b) throw UsageError("the t-test needs both sample files");
    auto a = stats::parse_samples(io::read_file(*inputs.samples_a));
    auto b = stats::parse_samples(io::read_file(*inputs.samples_b));
    report["stats"]["ttest"] = stats::to_json(stats::welch_t_test(a, b));
  }

  io::write_file_atomic(run_dir / files::kReportJson, io::dump_pretty(report));
  io::write_file_atomic(run_dir / files::kReportMarkdown, render_markdown(report));
  return report;
}

std::string render_markdown(const json & report)
{
  auto pct = [](const json & v) { return v.is_null() ? std::string("n/a") : text::format_fixed(100.0 * v.get<double>(), 2) + "%"; };
  std::string out = "# Metamorphic testing report\n\n";
  out += "## Validation rates\n\n";
  out += "| Method | Scenario Alignment | Logical Alignment | Manipulation Verification | Validation Rate | Valid / Total |\n";
  out += "|---|---|---|---|---|---|\n";
  for (const auto & row : report.at("validation").at("rows")) {
    out += "| " + row.at("method").get<std::string>() + " | " + pct(row.at("scenario_alignment_rate")) + " | " +
           pct(row.at("logical_alignment_rate")) + " | " + pct(row.at("manipulation_verification_rate")) + " | " +
           pct(row.at("validation_rate")) + " | " + row.at("valid").dump() + " / " + row.at("total").dump() + " |\n";
  }
  out += "\n## Violation rates\n\n";
  const auto & ads = report.at("violations").at("ads");
  out += "| Method |";
  for (const auto & a : ads) out += " " + a.get<std::string>() + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < ads.size(); ++i) out += "---|";
  out += "\n";
  for (const auto & row : report.at("violations").at("rows")) {
    out += "| " + row.at("method").get<std::string>() + " |";
    for (const auto & a : ads) out += " " + pct(row.at("rates").at(a.get<std::string>())) + " |";
    out += "\n";
  }
  const auto & diversity = report.at("diversity");
  out += "\n## Distinct manipulations\n\n";
  out += "Distinct manipulations among valid follow-ups: " + diversity.at("count").dump() + "\n\n";
  if (!diversity.at("histogram").empty()) {
    out += "| Manipulation | Uses |\n|---|---|\n";
    for (const auto & [phrase, uses] : diversity.at("histogram").items()) out += "| " + phrase + " | " + uses.dump() + " |\n";
  }
  const auto & st = report.at("stats");
  if (!st.empty()) {
    out += "\n## Statistics\n\n";
    if (st.contains("kappa")) {
      out += "Weighted Fleiss' kappa (" + st.at("kappa").at("weights").get<std::string>() +
             "): " + text::format_fixed(st.at("kappa").at("kappa").get<double>(), 4) + "\n\n";
    }
    if (st.contains("ttest")) {
      const auto & t = st.at("ttest");
      out += "Welch t-test: t = " + t.at("t").dump() + ", df = " + t.at("df").dump() + ", p = " + t.at("p").dump() + "\n";
    }
  }
  return out;
}

}  // namespace automt::pipeline
