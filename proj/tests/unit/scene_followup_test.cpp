#include "automt/backends/factory.hpp"
#include "automt/backends/mock.hpp"
#include "automt/backends/scene_tag.hpp"
#include "automt/error.hpp"
#include "automt/followup.hpp"
#include "automt/io.hpp"
#include "automt/scene.hpp"
#include "automt/synth.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using automt::backends::BackendKind;
using automt::followup::MaskPolicy;
using automt::followup::Placement;
using automt::mr::MetamorphicRelation;
using automt::ontology::Verb;
using automt::scene::SourceTestCase;
using automt::scene::TestCaseRepresentation;
using automt::testing::mock_client;
using automt::testing::tagged_frame;
using automt::testing::TempDir;
using nlohmann::json;

namespace
{

SourceTestCase small_case(const std::string & id, std::uint8_t road, std::vector<double> speeds)
{
  SourceTestCase c;
  c.id = id;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    c.frames.push_back(tagged_frame(id, road, static_cast<float>(speeds[i]), 0.0F, static_cast<std::uint16_t>(i)));
    c.steering_rad.push_back(0.0);
  }
  c.speed_mps = std::move(speeds);
  return c;
}

TestCaseRepresentation rep_with(const std::string & road, double speed)
{
  TestCaseRepresentation rep;
  rep.case_id = "c";
  rep.road_type = road;
  rep.ego_speed_mps = speed;
  return rep;
}

MetamorphicRelation mr_with(const std::string & road, const std::string & behavior, std::string manipulation = "a cyclist")
{
  return MetamorphicRelation{road, Verb::Adds, std::move(manipulation), behavior};
}

}  // namespace

TEST(SceneReply, WorkedExampleParses)
{
  auto chat = mock_client(BackendKind::Vision, "mock:canned");
  auto fields = automt::scene::analyze_scene(small_case("c", 0, {3, 3, 3}), *chat);
  EXPECT_EQ(fields, (automt::scene::SceneFields{"Afternoon", "Clear", "Intersection",
                                                "Cars, buildings, pedestrians, bicycles, trees"}));
}

TEST(SceneReply, MissingKeyIsMalformed)
{
  EXPECT_THROW(automt::scene::parse_scene_reply("time: Noon, road type: Highway, objects: cars"),
               automt::MalformedSceneReply);
  EXPECT_THROW(automt::scene::parse_scene_reply("time: , weather: Clear, road type: Highway, objects: x"),
               automt::MalformedSceneReply);
}

TEST(SceneReply, TrailingProseStaysInObjects)
{
  auto f = automt::scene::parse_scene_reply(
    "Time: Night,\nWeather: Rain;\nRoad Type: Field Path\nObjects: tractor, sheep. Let me know if you need more.");
  EXPECT_EQ(f.time, "Night");
  EXPECT_EQ(f.weather, "Rain");
  EXPECT_EQ(f.road_type, "Field Path");
  EXPECT_EQ(f.objects, "tractor, sheep. Let me know if you need more.");
}

TEST(SceneReply, KeysInAnyOrder)
{
  auto f = automt::scene::parse_scene_reply("objects: a bus, road type: highway, weather: fog, time: dawn");
  EXPECT_EQ(f.time, "dawn");
  EXPECT_EQ(f.objects, "a bus");
  EXPECT_EQ(f.road_type, "highway");
}

TEST(SceneCase, ValidationRejectsRaggedCases)
{
  auto c = small_case("c", 0, {1, 2});
  c.speed_mps.push_back(3);
  EXPECT_THROW(automt::scene::validate(c), automt::PreconditionError);
  EXPECT_THROW(automt::scene::validate(SourceTestCase{}), automt::PreconditionError);
}

TEST(Representation, WorkedSpeedExample)
{
  auto rep = automt::scene::build_representation(small_case("c", 0, {2.958, 2.958, 2.958}),
                                                  {"Afternoon", "Clear", "Intersection", "cars"});
  EXPECT_DOUBLE_EQ(rep.ego_speed_mps, 2.958);
  EXPECT_NEAR(rep.ego_speed_kmh(), 10.6488, 1e-9);
  EXPECT_EQ(rep.road_type, "intersection");
  auto doc = automt::scene::to_json(rep);
  EXPECT_EQ(doc["Test Case Representation"]["EgoVehicle"]["Speed"], "10.649 km/h");
}

TEST(Representation, MedianSummaries)
{
  auto rep = automt::scene::build_representation(small_case("c", 0, {1, 2, 100}), {"a", "b", "c", ""});
  EXPECT_EQ(rep.ego_speed_mps, 2.0);
  EXPECT_EQ(rep.ego_steering_rad, 0.0);
}

TEST(RepresentationProperty, PermutationInvariantAndRoundTrips)
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(0.0, 30.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> speeds(1 + rng() % 9);
    for (auto & s : speeds) s = d(rng);
    auto c = small_case("c" + std::to_string(trial), 1, speeds);
    for (auto & s : c.steering_rad) s = d(rng) / 30.0 - 0.5;
    automt::scene::SceneFields fields{"Morning", "Fog", " Field  Path ", "sheep"};
    auto rep = automt::scene::build_representation(c, fields);
    auto shuffled = c;
    std::shuffle(shuffled.speed_mps.begin(), shuffled.speed_mps.end(), rng);
    std::shuffle(shuffled.steering_rad.begin(), shuffled.steering_rad.end(), rng);
    EXPECT_EQ(automt::scene::build_representation(shuffled, fields), rep);
    EXPECT_NEAR(rep.ego_speed_kmh() / (rep.ego_speed_mps == 0 ? 1 : rep.ego_speed_mps),
                rep.ego_speed_mps == 0 ? 0.0 : 3.6, 1e-9);
    EXPECT_EQ(automt::scene::from_json(automt::scene::to_json(rep)), rep);
    EXPECT_EQ(automt::scene::from_json(json::parse(automt::scene::describe(rep))), rep);
  }
}

TEST(Corpus, WriteLoadRoundTrip)
{
  TempDir dir;
  automt::synth::CorpusOptions options;
  options.cases = 3;
  options.frames = 4;
  options.width = 40;
  options.height = 24;
  auto ids = automt::synth::write_corpus(dir.path(), options);
  EXPECT_EQ(ids, (std::vector<std::string>{"case_000", "case_001", "case_002"}));
  EXPECT_EQ(automt::scene::list_cases(dir.path()), ids);
  auto loaded = automt::scene::load_case(dir.path() / "case_001", "de");
  auto built = automt::synth::make_case(1, options);
  EXPECT_EQ(loaded.frames, built.frames);
  EXPECT_EQ(loaded.speed_mps, built.speed_mps);
  EXPECT_EQ(loaded.region, "de");
  auto tag = automt::backends::read_scene_tag(loaded.frames[2]);
  ASSERT_TRUE(tag.has_value());
  EXPECT_EQ(tag->frame_index, 2);
  EXPECT_EQ(static_cast<double>(tag->speed_mps), loaded.speed_mps[2]);
}

TEST(Corpus, MissingTelemetryIsIoError)
{
  TempDir dir;
  std::filesystem::create_directories(dir.path() / "case_x");
  EXPECT_THROW(automt::scene::load_case(dir.path() / "case_x"), automt::Error);
  EXPECT_THROW(automt::scene::list_cases(dir.path() / "missing"), automt::IoError);
}

TEST(SceneAnalysis, MockReadsTagAndSingleImageEndpoints)
{
  auto c = small_case("case_s", 3, {5, 5, 5});
  auto fields = automt::scene::analyze_scene(c, *mock_client(BackendKind::Vision));
  EXPECT_EQ(fields.road_type, "Highway");
  automt::backends::BackendEndpoint single{BackendKind::Vision, "single", "mock:default"};
  single.max_images = 1;
  auto client = automt::backends::make_client(single, 0);
  EXPECT_EQ(automt::scene::analyze_scene(c, *client).road_type, "Highway");
  EXPECT_THROW(automt::scene::analyze_scene(c, *mock_client(BackendKind::Vision, "mock:strict")),
               automt::MalformedSceneReply);
}

TEST(Applicability, WorkedCases)
{
  EXPECT_FALSE(automt::followup::applicability_filter(rep_with("highway", 0.0), mr_with("any roads", "slow down")));
  EXPECT_FALSE(automt::followup::applicability_filter(rep_with("intersection", 0.0),
                                                      mr_with("intersection", "keep current", "a green light")));
  EXPECT_TRUE(automt::followup::applicability_filter(rep_with("highway", 10.0), mr_with("any roads", "slow down")));
  EXPECT_FALSE(automt::followup::applicability_filter(rep_with("highway", 10.0), mr_with("crosswalk", "turn left")));
  EXPECT_TRUE(automt::followup::applicability_filter(rep_with("Crosswalk", 0.0), mr_with("crosswalk", "turn left")));
  EXPECT_FALSE(automt::followup::applicability_filter(rep_with("highway", 0.99), mr_with("any roads", "slow down")));
  EXPECT_TRUE(automt::followup::applicability_filter(rep_with("highway", 1.0), mr_with("any roads", "slow down")));
  EXPECT_FALSE(automt::followup::applicability_filter(rep_with("highway", 0.05), mr_with("any roads", "keep current")));
  EXPECT_TRUE(automt::followup::applicability_filter(rep_with("highway", 0.06), mr_with("any roads", "keep current")));
}

TEST(Plan, WorkedExamples)
{
  auto plan = automt::followup::plan_manipulation(mr_with("intersection", "slow down", "a red light on the roadside"));
  EXPECT_EQ(plan.verb, Verb::Adds);
  EXPECT_EQ(plan.placement, Placement::Roadside);
  EXPECT_EQ(plan.mask_policy, MaskPolicy::SegmentationFree);
  EXPECT_EQ(plan.mask_classes, automt::followup::default_mask_classes());
  EXPECT_EQ(plan.mask_classes.size(), 8u);
  EXPECT_EQ(plan.instruction, "a red light on the roadside");

  MetamorphicRelation storm{"any roads", Verb::Replaces, "the weather with a dust storm", "slow down"};
  plan = automt::followup::plan_manipulation(storm);
  EXPECT_EQ(plan.placement, Placement::Global);
  EXPECT_EQ(plan.mask_policy, MaskPolicy::None);
  EXPECT_TRUE(plan.mask_classes.empty());

  EXPECT_EQ(automt::followup::plan_manipulation(mr_with("any roads", "slow down", "a cyclist")).placement,
            Placement::OnRoad);
  EXPECT_EQ(automt::followup::plan_from_json(automt::followup::to_json(plan)), plan);
}

TEST(PlanProperty, InvariantsHoldForRandomMrs)
{
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    auto mr = automt::testing::random_mr(automt::testing::de_taxonomy(), rng);
    auto plan = automt::followup::plan_manipulation(mr);
    EXPECT_EQ(plan, automt::followup::plan_manipulation(mr));
    if (plan.verb == Verb::Replaces) {
      EXPECT_EQ(plan.placement, Placement::Global);
      EXPECT_EQ(plan.mask_policy, MaskPolicy::None);
    } else {
      EXPECT_EQ(plan.mask_policy, MaskPolicy::SegmentationFree);
      EXPECT_NE(plan.placement, Placement::Global);
    }
  }
}

TEST(MatchIndex, ParsesFirstIndex)
{
  EXPECT_EQ(automt::followup::parse_match_index("Index: 12\nRationale: x"), std::optional<std::size_t>(12));
  EXPECT_EQ(automt::followup::parse_match_index("index:3"), std::optional<std::size_t>(3));
  EXPECT_EQ(automt::followup::parse_match_index("none"), std::nullopt);
}

namespace
{

automt::store::MrStore two_entry_store(std::uint64_t count0, std::uint64_t count1)
{
  std::vector<automt::store::StoredMr> entries{
    {0, mr_with("any roads", "slow down", "a cyclist"), {1.0F, 0.0F}, count0},
    {1, mr_with("any roads", "slow down", "a bus"), {1.0F, 0.0F}, count1}};
  return automt::store::MrStore(std::move(entries));
}

std::shared_ptr<automt::backends::BackendClient> constant_embedder(std::vector<float> vector)
{
  auto transport = std::make_shared<automt::testing::ScriptedTransport>(
    [vector](std::string_view, const json & body, int) {
      json vectors = json::array();
      for (std::size_t i = 0; i < body.at("texts").size(); ++i) vectors.push_back(vector);
      return json{{"vectors", vectors}};
    });
  return automt::testing::scripted_client(BackendKind::Embed, transport);
}

}  // namespace

TEST(Match, EqualSimilarityFallsBackToLowerCount)
{
  auto store = two_entry_store(3, 1);
  auto embed = constant_embedder({1.0F, 0.0F});
  auto chat = mock_client(BackendKind::Chat, "mock:default?match_out_of_set=1");
  auto result = automt::followup::match_mr(rep_with("highway", 10.0), store, *chat, *embed);
  EXPECT_TRUE(result.fallback);
  EXPECT_EQ(result.mr_index, 1u);
  EXPECT_EQ(result.execution_count, 2u);
  EXPECT_EQ(store.entry(1).execution_count, 2u);
}

TEST(Match, ChatChoiceAmongSurvivorsIsAccepted)
{
  auto store = two_entry_store(0, 5);
  auto embed = constant_embedder({1.0F, 0.0F});
  auto chat = mock_client(BackendKind::Chat);
  auto result = automt::followup::match_mr(rep_with("highway", 10.0), store, *chat, *embed);
  EXPECT_FALSE(result.fallback);
  EXPECT_EQ(result.mr_index, 0u);
  EXPECT_FALSE(result.rationale.empty());
  EXPECT_EQ(result.survivors, (std::vector<std::size_t>{0, 1}));
}

TEST(Match, RoadKeyedEmbeddingsPickIntersectionMr)
{
  std::vector<automt::mr::MetamorphicRelation> mrs{mr_with("field path", "slow down", "an animal"),
                                                   mr_with("intersection", "slow down", "a red light")};
  automt::backends::MockScenario scenario;
  scenario.script = json::parse(R"({"embed": [
    {"pattern": "field path", "vector": [0.0, 1.0]},
    {"pattern": "intersection", "vector": [1.0, 0.0]}]})");
  automt::backends::BackendClient embed({BackendKind::Embed, "e", "mock:default"},
                                        std::make_shared<automt::backends::MockTransport>(BackendKind::Embed, scenario));
  auto store = automt::store::MrStore::build(mrs, embed);
  auto chat = mock_client(BackendKind::Chat);
  auto rep = rep_with("intersection", 8.0);
  auto result = automt::followup::match_mr(rep, store, *chat, embed);
  EXPECT_EQ(result.mr_index, 1u);
  ASSERT_FALSE(result.retrieved.empty());
  EXPECT_EQ(result.retrieved[0].index, 1u);
}

TEST(Match, NothingApplicableThrows)
{
  auto store = two_entry_store(0, 0);
  auto embed = constant_embedder({1.0F, 0.0F});
  EXPECT_THROW(automt::followup::match_mr(rep_with("highway", 0.0), store, *mock_client(BackendKind::Chat), *embed),
               automt::NoApplicableMr);
  EXPECT_EQ(store.entry(0).execution_count, 0u);
}

TEST(MatchProperty, ChosenMrAlwaysApplicableAndCountsSumToMatches)
{
  std::mt19937_64 rng(12);
  const auto & tax = automt::testing::de_taxonomy();
  std::vector<automt::mr::MetamorphicRelation> mrs;
  for (int i = 0; i < 30; ++i) mrs.push_back(automt::testing::random_mr(tax, rng));
  auto embed = mock_client(BackendKind::Embed);
  auto store = automt::store::MrStore::build(mrs, *embed);
  auto chat = mock_client(BackendKind::Chat);
  std::vector<std::string> roads(tax.road_types().begin(), tax.road_types().end());
  std::size_t matched = 0;
  automt::followup::MatchOptions options;
  options.top_k = 30;
  for (int i = 0; i < 100; ++i) {
    auto rep = rep_with(roads[rng() % roads.size()], (rng() % 3) * 2.5);
    rep.case_id = "case_" + std::to_string(i);
    try {
      auto result = automt::followup::match_mr(rep, store, *chat, *embed, options);
      EXPECT_TRUE(automt::followup::applicability_filter(rep, store.entry(result.mr_index).mr));
      ++matched;
    } catch (const automt::NoApplicableMr &) {
    }
  }
  std::uint64_t total = 0;
  for (const auto & e : store.entries()) total += e.execution_count;
  EXPECT_EQ(total, matched);
  EXPECT_GT(matched, 50u);
}

TEST(Generate, AddPlanProducesWatermarkedFramesAndArtifactRoundTrips)
{
  auto c = small_case("case_g", 0, std::vector<double>(10, 6.0));
  auto plan = automt::followup::plan_manipulation(mr_with("any roads", "slow down", "a cyclist on the road"));
  auto artifact = automt::followup::generate_followup(c, plan, 7, *mock_client(BackendKind::Edit),
                                                      *mock_client(BackendKind::Video));
  ASSERT_EQ(artifact.frames.size(), 10u);
  EXPECT_NE(artifact.edited_keyframe, artifact.keyframe);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(automt::backends::read_watermark(artifact.frames[i]), std::optional<std::uint16_t>(i));
  }
  EXPECT_EQ(artifact.lineage.at("mr_index"), 7);
  TempDir dir;
  automt::followup::write_artifact(dir.path() / "fu", artifact);
  auto back = automt::followup::read_artifact(dir.path() / "fu");
  EXPECT_EQ(back.frames, artifact.frames);
  EXPECT_EQ(back.plan, artifact.plan);
  EXPECT_EQ(back.edited_keyframe, artifact.edited_keyframe);
  EXPECT_EQ(back.mr_index, 7u);
}

TEST(Generate, ReplacePlanSendsNoMask)
{
  json seen;
  auto transport = std::make_shared<automt::testing::ScriptedTransport>(
    [&seen](std::string_view, const json & body, int) {
      seen = body;
      return json{{"image_b64", body.at("image_b64")}};
    });
  auto editor = automt::testing::scripted_client(BackendKind::Edit, transport);
  MetamorphicRelation rain{"any roads", Verb::Replaces, "the clear weather with rain", "slow down"};
  auto c = small_case("case_r", 0, {5, 5});
  automt::followup::generate_followup(c, automt::followup::plan_manipulation(rain), 0, *editor,
                                      *mock_client(BackendKind::Video));
  EXPECT_FALSE(seen.contains("mask_classes"));
  EXPECT_EQ(seen.at("mode"), "replace");
}

TEST(Generate, ShortVideoIsRejected)
{
  auto c = small_case("case_s", 0, std::vector<double>(10, 6.0));
  auto plan = automt::followup::plan_manipulation(mr_with("any roads", "slow down"));
  EXPECT_THROW(automt::followup::generate_followup(c, plan, 0, *mock_client(BackendKind::Edit),
                                                   *mock_client(BackendKind::Video, "mock:default?short=1")),
               automt::VideoRejected);
}
