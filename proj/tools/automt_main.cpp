#include "automt/config.hpp"
#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/pipeline.hpp"
#include "automt/stats.hpp"
#include "automt/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace
{

using nlohmann::json;
namespace fs = std::filesystem;

struct GlobalOptions
{
  std::string config_path;
  std::optional<std::string> region;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallel;
  std::optional<std::string> corpus;
  std::optional<std::string> output;
  std::string backends;
  bool force = false;
  bool quiet = false;
};

automt::config::RunConfig resolve_config(const GlobalOptions & g)
{
  if (g.config_path.empty()) throw automt::UsageError("--config is required for this command");
  auto cfg = automt::config::load_config(g.config_path);
  automt::config::apply_environment(cfg);
  if (g.region) cfg.region = *g.region;
  if (g.seed) cfg.seed = *g.seed;
  if (g.parallel) cfg.parallel = *g.parallel;
  // Command-line paths are relative to the working directory, not the config.
  if (g.corpus) cfg.corpus = fs::absolute(*g.corpus).string();
  if (g.output) cfg.output = fs::absolute(*g.output).string();
  if (!g.backends.empty()) automt::config::apply_backend_overrides(cfg, g.backends);
  return cfg;
}

void emit(const json & value)
{
  std::cout << automt::io::dump(value) << '\n';
}

int fail(const std::string & code, const std::string & message, int exit_code)
{
  std::cerr << automt::io::dump(json{{"code", code}, {"message", message}}) << '\n';
  return exit_code;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Metamorphic testing engine for driving systems: traffic rules to Gherkin MRs to follow-up tests"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Run configuration file");
  app.add_option("--region", g.region, "Region label of the rule corpus");
  app.add_option("--seed", g.seed, "Seed for mock backends");
  app.add_option("--parallel", g.parallel, "Parallelism bound")->check(CLI::PositiveNumber);
  app.add_option("--corpus", g.corpus, "Source test case corpus directory");
  app.add_option("--output", g.output, "Run directory");
  app.add_option("--backends", g.backends, "Backend overrides: role=url[,role=url...]");
  app.add_flag("--force", g.force, "Redo work whose outputs already exist");
  app.add_flag("--quiet", g.quiet, "No progress notes on stderr");

  std::function<int()> action;

  auto context = [&](const automt::config::RunConfig & cfg) {
    return automt::pipeline::make_context(cfg, g.force, g.quiet ? nullptr : &std::cerr);
  };

  auto * extract = app.add_subcommand("extract", "Extract MRs from a traffic-rule file");
  std::string rules_file, parser_names;
  extract->add_option("rules", rules_file, "Rule file, one rule per line (defaults to the configured rules)");
  extract->add_option("--parsers", parser_names, "Comma-separated parser profiles to use");
  extract->callback([&] {
    action = [&] {
      auto cfg = resolve_config(g);
      if (!parser_names.empty()) automt::config::select_parsers(cfg, parser_names);
      auto path = rules_file.empty() ? cfg.resolve(cfg.rules) : fs::path(rules_file);
      if (rules_file.empty() && cfg.rules.empty()) throw automt::UsageError("no rule file given or configured");
      auto ctx = context(cfg);
      emit(automt::pipeline::run_extract(ctx, path));
      return 0;
    };
  });

  auto stage = [&](const char * name, const char * help, json (*fn)(automt::pipeline::RunContext &)) {
    auto * sub = app.add_subcommand(name, help);
    sub->callback([&, fn] {
      action = [&, fn] {
        auto ctx = context(resolve_config(g));
        emit(fn(ctx));
        return 0;
      };
    });
  };
  stage("build-store", "Embed accepted MRs into the MR store", &automt::pipeline::run_build_store);
  stage("analyze", "Describe every source test case", &automt::pipeline::run_analyze);
  stage("generate", "Match MRs and generate follow-up test cases", &automt::pipeline::run_generate);
  stage("validate", "Judge follow-up validity", &automt::pipeline::run_validate);
  stage("evaluate", "Judge ADS predictions for MR violations", &automt::pipeline::run_evaluate);

  automt::pipeline::ReportInputs report_inputs;
  std::string run_dir, ratings, samples_a, samples_b, weights = "linear";
  auto add_stats_inputs = [&](CLI::App * sub) {
    sub->add_option("--ratings", ratings, "CSV rating table (items x raters)");
    sub->add_option("--categories", report_inputs.categories, "Number of rating categories")->check(CLI::Range(2, 1000));
    sub->add_option("--weights", weights, "Kappa weights: linear or quadratic");
    sub->add_option("--samples-a", samples_a, "First sample list for the t-test");
    sub->add_option("--samples-b", samples_b, "Second sample list for the t-test");
  };
  auto fill_inputs = [&] {
    report_inputs.weights = automt::stats::weights_from_string(weights);
    if (!ratings.empty()) report_inputs.ratings = ratings;
    if (!samples_a.empty()) report_inputs.samples_a = samples_a;
    if (!samples_b.empty()) report_inputs.samples_b = samples_b;
  };

  auto * report = app.add_subcommand("report", "Aggregate a run directory into report.json and report.md");
  report->add_option("--run-dir", run_dir, "Run directory (defaults to the configured output)");
  add_stats_inputs(report);
  report->callback([&] {
    action = [&] {
      fill_inputs();
      std::string label = "AutoMT";
      fs::path dir = run_dir;
      if (!g.config_path.empty()) {
        auto cfg = resolve_config(g);
        label = cfg.label;
        if (dir.empty()) dir = cfg.resolve(cfg.output);
      }
      if (dir.empty()) throw automt::UsageError("give --run-dir or --config");
      emit(automt::pipeline::run_report(dir, label, report_inputs));
      return 0;
    };
  });

  auto * run = app.add_subcommand("run", "Run every stage from extract to report");
  run->callback([&] {
    action = [&] {
      auto cfg = resolve_config(g);
      if (cfg.rules.empty()) throw automt::UsageError("no rule file configured");
      auto ctx = context(cfg);
      json stages = json::array();
      stages.push_back(automt::pipeline::run_extract(ctx, cfg.resolve(cfg.rules)));
      stages.push_back(automt::pipeline::run_build_store(ctx));
      stages.push_back(automt::pipeline::run_analyze(ctx));
      stages.push_back(automt::pipeline::run_generate(ctx));
      stages.push_back(automt::pipeline::run_validate(ctx));
      stages.push_back(automt::pipeline::run_evaluate(ctx));
      automt::pipeline::run_report(ctx.run_dir, cfg.label);
      stages.push_back(json{{"stage", "report"}});
      emit(json{{"stages", stages}});
      return 0;
    };
  });

  auto * stats = app.add_subcommand("stats", "Agreement and significance statistics");
  stats->require_subcommand(1);
  auto * kappa = stats->add_subcommand("kappa", "Weighted Fleiss' kappa of a rating table");
  kappa->add_option("--ratings", ratings, "CSV rating table (items x raters)")->required();
  kappa->add_option("--categories", report_inputs.categories, "Number of rating categories")->check(CLI::Range(2, 1000));
  kappa->add_option("--weights", weights, "linear or quadratic");
  kappa->callback([&] {
    action = [&] {
      auto table = automt::stats::parse_rating_csv(automt::io::read_file(ratings), report_inputs.categories);
      emit(json{{"kappa", automt::stats::weighted_fleiss_kappa(table, automt::stats::weights_from_string(weights))}});
      return 0;
    };
  });
  auto * ttest = stats->add_subcommand("ttest", "Welch's two-sided t-test of two sample lists");
  ttest->add_option("a", samples_a, "First sample file")->required();
  ttest->add_option("b", samples_b, "Second sample file")->required();
  ttest->callback([&] {
    action = [&] {
      auto a = automt::stats::parse_samples(automt::io::read_file(samples_a));
      auto b = automt::stats::parse_samples(automt::io::read_file(samples_b));
      emit(automt::stats::to_json(automt::stats::welch_t_test(a, b)));
      return 0;
    };
  });

  auto * synth = app.add_subcommand("synth", "Write a synthetic tagged test-case corpus");
  std::string synth_out;
  automt::synth::CorpusOptions synth_options;
  synth->add_option("--out", synth_out, "Corpus directory")->required();
  synth->add_option("--cases", synth_options.cases, "Number of cases")->check(CLI::PositiveNumber);
  synth->add_option("--frames", synth_options.frames, "Frames per case")->check(CLI::PositiveNumber);
  synth->callback([&] {
    action = [&] {
      if (g.seed) synth_options.seed = *g.seed;
      auto ids = automt::synth::write_corpus(synth_out, synth_options);
      emit(json{{"corpus", synth_out}, {"cases", ids}});
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    return fail("usage_error", e.what(), 2);
  }

  try {
    return action ? action() : 0;
  } catch (const automt::Error & e) {
    return fail(e.code(), e.what(), e.exit_code());
  } catch (const fs::filesystem_error & e) {
    return fail("io_error", e.what(), 2);
  } catch (const nlohmann::json::exception & e) {
    return fail("parse_error", e.what(), 1);
  } catch (const std::exception & e) {
    return fail("internal_error", e.what(), 1);
  }
}
