#include "automt/backends/client.hpp"
#include "automt/backends/factory.hpp"
#include "automt/backends/mock.hpp"
#include "automt/backends/scene_tag.hpp"
#include "automt/backends/wire.hpp"
#include "automt/error.hpp"
#include "automt/io.hpp"
#include "automt/prompts.hpp"
#include "automt/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cmath>
#include <thread>

using automt::backends::BackendKind;
using automt::backends::EditMode;
using automt::testing::mock_client;
using automt::testing::ScriptedTransport;
using automt::testing::tagged_frame;
using nlohmann::json;

TEST(SceneTag, RoundTripsAllFields)
{
  automt::Image image(40, 6, {1, 2, 3});
  automt::backends::SceneTag tag{0xDEADBEEF, 513, 4, 2, 3, 12.625F, -0.078125F};
  automt::backends::write_scene_tag(image, tag);
  auto back = automt::backends::read_scene_tag(image);
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, tag);
}

TEST(SceneTag, AbsentOnPlainOrNarrowImages)
{
  EXPECT_FALSE(automt::backends::read_scene_tag(automt::Image(40, 6, {9, 9, 9})).has_value());
  EXPECT_FALSE(automt::backends::read_scene_tag(automt::Image(8, 6)).has_value());
}

TEST(Watermark, RoundTripAndAbsence)
{
  automt::Image image(32, 8, {50, 60, 70});
  EXPECT_FALSE(automt::backends::read_watermark(image).has_value());
  automt::backends::write_watermark(image, 4097);
  EXPECT_EQ(automt::backends::read_watermark(image), std::optional<std::uint16_t>(4097));
}

TEST(Wire, ImageBase64RoundTrip)
{
  auto frame = tagged_frame("case_x", 2, 3.5F, 0.25F);
  EXPECT_EQ(automt::backends::image_from_b64(automt::backends::image_to_b64(frame)), frame);
  EXPECT_THROW(automt::backends::image_from_b64("!!!"), automt::Error);
}

TEST(Wire, RequestValidationNamesTheField)
{
  using automt::backends::validate_request;
  EXPECT_NO_THROW(validate_request("/v1/chat", json{{"prompt", "hi"}}));
  EXPECT_THROW(validate_request("/v1/chat", json{{"prompt", 3}}), automt::ProtocolError);
  EXPECT_THROW(validate_request("/v1/chat", json{{"prompt", "x"}, {"extra", 1}}), automt::ProtocolError);
  EXPECT_THROW(validate_request("/v1/embed", json{{"texts", json::array()}}), automt::ProtocolError);
  EXPECT_THROW(validate_request("/v1/edit", json{{"image_b64", "x"}, {"instruction", "y"}, {"mode", "blend"}}),
               automt::ProtocolError);
  EXPECT_THROW(
    validate_request("/v1/video", json{{"image_b64", "x"}, {"speed_mps", {1}}, {"steering_rad", {0}}, {"frame_count", 0}}),
    automt::ProtocolError);
  EXPECT_THROW(validate_request("/v1/nope", json::object()), automt::ProtocolError);
}

TEST(Wire, ErrorRepliesMapToEngineErrors)
{
  using automt::backends::raise_error_reply;
  EXPECT_THROW(raise_error_reply(422, json{{"code", "edit_rejected"}, {"message", "m"}}), automt::EditRejected);
  EXPECT_THROW(raise_error_reply(422, json{{"code", "video_rejected"}, {"message", "m"}}), automt::VideoRejected);
  EXPECT_THROW(raise_error_reply(504, json{{"code", "upstream_timeout"}, {"message", "m"}}), automt::Timeout);
  EXPECT_THROW(raise_error_reply(503, json()), automt::backends::TransportFailure);
  EXPECT_THROW(raise_error_reply(429, json()), automt::backends::TransportFailure);
  EXPECT_THROW(raise_error_reply(400, json{{"code", "bad_request"}, {"message", "m"}}), automt::ProtocolError);
}

TEST(Wire, RequestIdIsContentHash)
{
  auto a = automt::backends::request_id("/v1/chat", json{{"prompt", "x"}});
  EXPECT_EQ(a, automt::backends::request_id("/v1/chat", json{{"prompt", "x"}}));
  EXPECT_NE(a, automt::backends::request_id("/v1/chat", json{{"prompt", "y"}}));
  EXPECT_NE(a, automt::backends::request_id("/v1/embed", json{{"prompt", "x"}}));
}

TEST(MockUrl, ParsesScenarioAndParams)
{
  auto s = automt::backends::parse_mock_url("mock:strict?seed=9&noise=0.25&salt=a", 1);
  EXPECT_EQ(s.name, "strict");
  EXPECT_EQ(s.seed, 9u);
  EXPECT_DOUBLE_EQ(s.number("noise", 0), 0.25);
  EXPECT_EQ(s.string("salt", ""), "a");
  EXPECT_EQ(automt::backends::parse_mock_url("mock:", 4).seed, 4u);
  EXPECT_THROW(automt::backends::parse_mock_url("mock:weird", 0), automt::ConfigError);
  EXPECT_THROW(automt::backends::parse_mock_url("mock:default?noise", 0), automt::ConfigError);
  EXPECT_THROW(automt::backends::parse_mock_url("mock:default?noise=abc", 0).number("noise", 0), automt::ConfigError);
}

TEST(MockChat, StrictScenarioRefusesUnscriptedPrompts)
{
  auto chat = mock_client(BackendKind::Chat, "mock:strict");
  EXPECT_EQ(chat->chat("anything"), automt::backends::kRefusalMarker);
}

TEST(MockChat, ScriptedRuleWinsAndKindFilterApplies)
{
  automt::backends::MockScenario scenario;
  scenario.name = "strict";
  scenario.script = json::parse(R"({"chat": [
    {"kind": "mr_validation", "pattern": "red", "response": "[\"yes\",\"yes\",\"yes\"]"},
    {"pattern": "hello", "response": "hi there"}]})");
  auto transport = std::make_shared<automt::backends::MockTransport>(BackendKind::Chat, scenario);
  automt::backends::BackendEndpoint endpoint{BackendKind::Chat, "c", "mock:strict"};
  automt::backends::BackendClient client(endpoint, transport);
  EXPECT_EQ(client.chat("User: hello world"), "hi there");
  EXPECT_EQ(client.chat("User: red light"), automt::backends::kRefusalMarker);
  EXPECT_EQ(client.chat(automt::prompts::mr_validation_prompt("red light", "g", "AutoMT")),
            "[\"yes\",\"yes\",\"yes\"]");
}

TEST(MockChat, CannedScenarioEmitsRedLightMr)
{
  auto chat = mock_client(BackendKind::Chat, "mock:canned");
  auto reply = chat->chat(automt::prompts::rule_parser_prompt(
    "Steady red light (stop): stop before the stop line.", automt::testing::de_taxonomy(), "AutoMT"));
  EXPECT_EQ(reply,
            "Given the ego-vehicle approaches to an intersection\n"
            "When AutoMT adds a red light on the roadside\n"
            "Then ego-vehicle should slow down");
}

TEST(MockChat, SameRequestSameReplyAcrossClients)
{
  auto prompt = automt::prompts::rule_parser_prompt(
    "Drivers must yield to pedestrians at a crosswalk.", automt::testing::de_taxonomy(), "AutoMT");
  auto a = mock_client(BackendKind::Chat, "mock:default?salt=p&noise=0.5", 3)->chat(prompt);
  auto b = mock_client(BackendKind::Chat, "mock:default?salt=p&noise=0.5", 3)->chat(prompt);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("Given the ego-vehicle approaches to"), std::string::npos);
}

TEST(MockEmbed, DeterministicUnitNorm)
{
  auto embed = mock_client(BackendKind::Embed, "mock:default?dim=32", 5);
  std::vector<std::string> texts{"alpha", "beta", "alpha"};
  auto vectors = embed->embed(texts);
  ASSERT_EQ(vectors.size(), 3u);
  EXPECT_EQ(vectors[0], vectors[2]);
  EXPECT_NE(vectors[0], vectors[1]);
  for (const auto & v : vectors) {
    ASSERT_EQ(v.size(), 32u);
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-6);
  }
}

TEST(MockEmbed, GoldenValues)
{
  const std::vector<std::pair<std::string, std::vector<float>>> golden{
    {"slow down",
     {-0.0896586105F, 0.321505219F, 0.133459628F, 0.354135513F, -0.0664296672F, -0.611954987F, -0.423920751F,
      -0.432159305F}},
    {"a red light on the roadside",
     {-0.120283194F, -0.0408116393F, 0.398623198F, 0.376701295F, -0.417545676F, 0.602632284F, -0.0953967571F,
      -0.369393319F}},
    {"Given the ego-vehicle approaches to an intersection",
     {0.217500672F, -0.241568357F, -0.223450691F, -0.385590732F, -0.220502734F, -0.444864005F, -0.408415943F,
      0.531412065F}}};
  for (const auto & [text, expected] : golden) {
    EXPECT_EQ(automt::backends::mock_embedding(text, 0, 8), expected) << text;
  }
}

TEST(MockEdit, AddWithoutMaskIsRejected)
{
  auto edit = mock_client(BackendKind::Edit);
  auto frame = tagged_frame("c", 0, 1, 0);
  EXPECT_THROW(edit->edit(frame, std::nullopt, "a cyclist", EditMode::Add), automt::EditRejected);
  EXPECT_THROW(edit->edit(frame, automt::backends::MaskRequest{{"car"}, "on_road"}, "  ", EditMode::Add),
               automt::EditRejected);
}

TEST(MockEdit, ReplaceIsDeterministic)
{
  auto frame = tagged_frame("c", 0, 1, 0);
  auto a = mock_client(BackendKind::Edit)->edit(frame, std::nullopt, "rain", EditMode::Replace);
  auto b = mock_client(BackendKind::Edit)->edit(frame, std::nullopt, "rain", EditMode::Replace);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, frame);
  EXPECT_EQ(automt::backends::read_scene_tag(a), automt::backends::read_scene_tag(frame));
}

TEST(MockEdit, StampChangesOnlyItsRegion)
{
  automt::Image source(64, 32, {10, 20, 30});
  for (const std::string placement : {"on_road", "roadside"}) {
    auto edited = automt::backends::mock_edit(source, "a cyclist", EditMode::Add, placement);
    int x0 = 64 * 3 / 8, x1 = 64 * 5 / 8, y0 = 16, y1 = 32 * 7 / 8;
    if (placement == "roadside") {
      x0 = 48;
      x1 = 60;
      y0 = 32 / 3;
      y1 = 32 * 2 / 3;
    }
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 64; ++x) {
        bool inside = x >= x0 && x < x1 && y >= y0 && y < y1;
        EXPECT_EQ(edited.at(x, y) != source.at(x, y), inside) << placement << " " << x << "," << y;
      }
    }
  }
}

TEST(MockVideo, FramesCarryWatermarkAndShareKeyframe)
{
  auto video = mock_client(BackendKind::Video);
  auto key = tagged_frame("case_v", 1, 5.0F, 0.0F, 0, 48, 12);
  std::vector<double> speed(10, 5.0), steer(10, 0.0);
  speed[3] = 6.0;
  auto frames = video->video(key, speed, steer, 10);
  ASSERT_EQ(frames.size(), 10u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(automt::backends::read_watermark(frames[i]), std::optional<std::uint16_t>(i));
    auto tag = automt::backends::read_scene_tag(frames[i]);
    ASSERT_TRUE(tag.has_value());
    EXPECT_EQ(tag->frame_index, i);
    EXPECT_FLOAT_EQ(tag->speed_mps, static_cast<float>(speed[i]));
    for (int y = automt::backends::kWatermarkHeight; y < key.height - 1; ++y) {
      for (int x = 0; x < key.width; ++x) ASSERT_EQ(frames[i].at(x, y), key.at(x, y));
    }
  }
}

TEST(MockVideo, LengthContract)
{
  auto key = tagged_frame("case_v", 1, 5.0F, 0.0F);
  std::vector<double> speed(3, 5.0), steer(2, 0.0);
  EXPECT_THROW(mock_client(BackendKind::Video)->video(key, speed, steer, 3), automt::PreconditionError);
  steer.push_back(0.0);
  EXPECT_THROW(mock_client(BackendKind::Video, "mock:default?short=1")->video(key, speed, steer, 3),
               automt::VideoRejected);
}

TEST(MockPredict, TaggedFramesFollowTelemetryAndModes)
{
  std::vector<automt::Image> source{tagged_frame("case_p", 0, 8.0F, 0.0F, 0), tagged_frame("case_p", 0, 8.0F, 0.0F, 1)};
  auto followup = source;
  for (std::size_t i = 0; i < followup.size(); ++i) {
    automt::backends::write_watermark(followup[i], static_cast<std::uint16_t>(i));
  }
  auto ads = mock_client(BackendKind::Predict, "mock:default?default=slow&offset=0.5");
  auto src = ads->predict(source);
  EXPECT_EQ(src.speed_mps, (std::vector<double>{8.5, 8.5}));
  auto fu = ads->predict(followup);
  EXPECT_EQ(fu.speed_mps, (std::vector<double>{4.25, 4.25}));
  auto left = mock_client(BackendKind::Predict, "mock:default?default=left")->predict(followup);
  EXPECT_DOUBLE_EQ(left.steering_rad[0], 0.3);
  EXPECT_EQ(ads->predict(followup).speed_mps, fu.speed_mps);
}

TEST(MockPredict, ScriptedModeByCaseId)
{
  automt::backends::MockScenario scenario;
  scenario.script = json{{"predict", {{"case_a", "stop"}, {"case_b", "right"}}}};
  automt::backends::BackendClient client(
    {BackendKind::Predict, "p", "mock:default"},
    std::make_shared<automt::backends::MockTransport>(BackendKind::Predict, scenario));
  auto a = tagged_frame("case_a", 0, 6.0F, 0.0F);
  auto b = tagged_frame("case_b", 0, 6.0F, 0.0F);
  automt::backends::write_watermark(a, 0);
  automt::backends::write_watermark(b, 0);
  std::vector<automt::Image> fa{a}, fb{b};
  EXPECT_EQ(client.predict(fa).speed_mps[0], 0.0);
  EXPECT_DOUBLE_EQ(client.predict(fb).steering_rad[0], -0.3);
  EXPECT_EQ(client.predict(fb).speed_mps[0], 6.0);
}

TEST(MockTransport, WrongRouteIsRejected)
{
  automt::backends::MockTransport transport(BackendKind::Embed, {});
  EXPECT_THROW(transport.post("/v1/chat", json{{"prompt", "x"}}, "id"), automt::ProtocolError);
}

TEST(Client, KindIsEnforced)
{
  auto chat = mock_client(BackendKind::Chat);
  std::vector<std::string> texts{"x"};
  EXPECT_THROW(chat->embed(texts), automt::Error);
  auto vision = mock_client(BackendKind::Vision);
  EXPECT_NO_THROW(vision->chat("hello"));
}

TEST(Client, RetriesThenSucceeds)
{
  auto transport = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int call) -> json {
    if (call < 2) throw automt::backends::TransportFailure("flaky");
    return json{{"text", "ok"}};
  });
  auto client = automt::testing::scripted_client(BackendKind::Chat, transport);
  EXPECT_EQ(client->chat("p"), "ok");
  EXPECT_EQ(transport->calls(), 3);
}

TEST(Client, GivesUpAfterRetryBudget)
{
  auto transport = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int) -> json {
    throw automt::backends::TransportFailure("down");
  });
  auto client = automt::testing::scripted_client(BackendKind::Chat, transport);
  EXPECT_THROW(client->chat("p"), automt::BackendUnavailable);
  EXPECT_EQ(transport->calls(), 3);
}

TEST(Client, RepeatedTimeoutsSurfaceAsTimeout)
{
  auto transport = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int) -> json {
    throw automt::Timeout("slow");
  });
  auto client = automt::testing::scripted_client(BackendKind::Chat, transport, 1);
  EXPECT_THROW(client->chat("p"), automt::Timeout);
  EXPECT_EQ(transport->calls(), 2);
}

TEST(Client, NonRetryableErrorsPropagateImmediately)
{
  auto transport = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int) -> json {
    throw automt::EditRejected("no");
  });
  auto client = automt::testing::scripted_client(BackendKind::Edit, transport);
  EXPECT_THROW(client->edit(tagged_frame("c", 0, 0, 0), std::nullopt, "rain", EditMode::Replace),
               automt::EditRejected);
  EXPECT_EQ(transport->calls(), 1);
}

TEST(Client, CacheServesRepeatedRequests)
{
  auto transport = std::make_shared<ScriptedTransport>(
    [](std::string_view, const json & body, int) { return json{{"text", body.at("prompt")}}; });
  auto client = automt::testing::scripted_client(BackendKind::Chat, transport);
  EXPECT_EQ(client->chat("a"), "a");
  EXPECT_EQ(client->chat("a"), "a");
  EXPECT_EQ(client->chat("b"), "b");
  EXPECT_EQ(transport->calls(), 2);
  EXPECT_EQ(client->transport_calls(), 2u);
  client->set_cache_enabled(false);
  client->chat("a");
  EXPECT_EQ(transport->calls(), 3);
}

TEST(Client, MalformedResponseIsProtocolError)
{
  auto transport = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int) {
    return json{{"vectors", {{1.0, 0.0}, {1.0}}}};
  });
  auto client = automt::testing::scripted_client(BackendKind::Embed, transport);
  std::vector<std::string> texts{"a", "b"};
  EXPECT_THROW(client->embed(texts), automt::DimensionMismatch);
  auto wrong = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int) {
    return json{{"txt", "x"}};
  });
  EXPECT_THROW(automt::testing::scripted_client(BackendKind::Chat, wrong)->chat("p"), automt::ProtocolError);
}

TEST(Client, EmbedCountMismatchIsProtocolError)
{
  auto transport = std::make_shared<ScriptedTransport>([](std::string_view, const json &, int) {
    return json{{"vectors", {{1.0, 0.0}}}};
  });
  std::vector<std::string> texts{"a", "b"};
  EXPECT_THROW(automt::testing::scripted_client(BackendKind::Embed, transport)->embed(texts), automt::ProtocolError);
}

TEST(Factory, EnvironmentOverrides)
{
  ::setenv("AUTOMT_BACKEND_EMBED_URL", "mock:strict", 1);
  EXPECT_EQ(automt::backends::url_from_env(BackendKind::Embed, "x"), "mock:strict");
  ::unsetenv("AUTOMT_BACKEND_EMBED_URL");
  EXPECT_EQ(automt::backends::url_from_env(BackendKind::Embed, "x"), "x");
  ::setenv("AUTOMT_MOCK_SEED", "42", 1);
  EXPECT_EQ(automt::backends::mock_seed_from_env(1), 42u);
  ::setenv("AUTOMT_MOCK_SEED", "forty", 1);
  EXPECT_THROW(automt::backends::mock_seed_from_env(1), automt::ConfigError);
  ::unsetenv("AUTOMT_MOCK_SEED");
  EXPECT_EQ(automt::backends::mock_seed_from_env(1), 1u);
}

TEST(Factory, RejectsNonHttpUrls)
{
  automt::backends::BackendEndpoint endpoint{BackendKind::Chat, "x", "https://example.com"};
  EXPECT_THROW(automt::backends::make_client(endpoint, 0), automt::ConfigError);
}

namespace
{

// Local HTTP stub bound to an ephemeral port.
class StubServer
{
public:
  StubServer()
  {
    server_.Post("/api/v1/chat", [this](const httplib::Request & req, httplib::Response & res) {
      last_auth_ = req.get_header_value("Authorization");
      last_request_id_ = req.get_header_value("X-Request-Id");
      auto body = json::parse(req.body);
      auto prompt = body.at("prompt").get<std::string>();
      if (prompt == "fail") {
        ++failures_;
        res.status = 503;
        res.set_content(R"({"code":"overloaded","message":"try later"})", "application/json");
        return;
      }
      if (prompt == "bad") {
        res.status = 400;
        res.set_content(R"({"code":"bad_request","message":"nope"})", "application/json");
        return;
      }
      res.set_content(json{{"text", "echo: " + prompt}}.dump(), "application/json");
    });
    server_.Post("/api/v1/edit", [](const httplib::Request &, httplib::Response & res) {
      res.status = 422;
      res.set_content(R"({"code":"edit_rejected","message":"unsafe"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer()
  {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::string last_auth_;
  std::string last_request_id_;
  std::atomic<int> failures_{0};
};

}  // namespace

TEST(HttpTransport, RoundTripWithTokenAndRequestId)
{
  StubServer stub;
  automt::backends::BackendEndpoint endpoint{BackendKind::Chat, "remote", stub.url()};
  endpoint.bearer_token = "s3cret";
  endpoint.retry.initial_backoff = std::chrono::milliseconds(1);
  auto client = automt::backends::make_client(endpoint, 0);
  EXPECT_EQ(client->chat("hello"), "echo: hello");
  EXPECT_EQ(stub.last_auth_, "Bearer s3cret");
  EXPECT_EQ(stub.last_request_id_, automt::backends::request_id("/v1/chat", json{{"prompt", "hello"}}));
}

TEST(HttpTransport, ServerErrorsRetryThenFail)
{
  StubServer stub;
  automt::backends::BackendEndpoint endpoint{BackendKind::Chat, "remote", stub.url()};
  endpoint.retry.initial_backoff = std::chrono::milliseconds(1);
  auto client = automt::backends::make_client(endpoint, 0);
  EXPECT_THROW(client->chat("fail"), automt::BackendUnavailable);
  EXPECT_EQ(stub.failures_.load(), 3);
  EXPECT_THROW(client->chat("bad"), automt::ProtocolError);
}

TEST(HttpTransport, ErrorBodyMapsToEditRejected)
{
  StubServer stub;
  automt::backends::BackendEndpoint endpoint{BackendKind::Edit, "remote", stub.url()};
  auto client = automt::backends::make_client(endpoint, 0);
  EXPECT_THROW(client->edit(tagged_frame("c", 0, 0, 0), std::nullopt, "rain", EditMode::Replace),
               automt::EditRejected);
}

TEST(HttpTransport, ConnectionRefusedIsBackendUnavailable)
{
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  automt::backends::BackendEndpoint endpoint{BackendKind::Chat, "gone", "http://127.0.0.1:" + std::to_string(port)};
  endpoint.retry.initial_backoff = std::chrono::milliseconds(1);
  endpoint.timeout_ms = 2000;
  EXPECT_THROW(automt::backends::make_client(endpoint, 0)->chat("x"), automt::BackendUnavailable);
}

namespace
{

// Writes every request and response body that crosses it to a directory.
class RecordingTransport : public automt::backends::Transport
{
public:
  RecordingTransport(std::shared_ptr<automt::backends::Transport> inner, std::filesystem::path dir)
  : inner_(std::move(inner)), dir_(std::move(dir))
  {
  }
  json post(std::string_view route, const json & body, const std::string & id) override
  {
    auto name = std::string(route.substr(route.rfind('/') + 1));
    write(name + ".request", body);
    try {
      auto reply = inner_->post(route, body, id);
      write(name + ".response", reply);
      return reply;
    } catch (const automt::Error & e) {
      write("error", json{{"code", e.code()}, {"message", e.what()}});
      throw;
    }
  }

private:
  void write(const std::string & stem, const json & value)
  {
    automt::io::write_file_atomic(
      dir_ / (stem + ".mock" + std::to_string(counter_++) + ".json"), automt::io::dump_pretty(value));
  }
  std::shared_ptr<automt::backends::Transport> inner_;
  std::filesystem::path dir_;
  int counter_ = 0;
};

std::shared_ptr<automt::backends::BackendClient> recording_client(BackendKind kind, const std::string & url)
{
  std::filesystem::path dir = AUTOMT_WIRE_RECORDINGS;
  std::filesystem::create_directories(dir);
  automt::backends::BackendEndpoint endpoint{kind, "rec." + automt::backends::to_string(kind), url};
  auto inner = automt::backends::make_transport(endpoint, 0);
  return std::make_shared<automt::backends::BackendClient>(
    endpoint, std::make_shared<RecordingTransport>(inner, dir / automt::backends::to_string(kind)));
}

}  // namespace

TEST(WireRecording, MockTrafficForEveryRoute)
{
  std::filesystem::remove_all(AUTOMT_WIRE_RECORDINGS);
  auto frame = tagged_frame("case_rec", 3, 7.0F, 0.125F, 0, 32, 8);

  auto chat = recording_client(BackendKind::Chat, "mock:default");
  chat->chat(automt::prompts::rule_parser_prompt("Yield at roundabouts.", automt::testing::de_taxonomy(), "AutoMT"));
  auto vision = recording_client(BackendKind::Vision, "mock:default");
  std::vector<automt::Image> frames{frame, frame};
  vision->chat(automt::prompts::scene_analysis_prompt(), frames);

  std::vector<std::string> texts{"a", "b"};
  recording_client(BackendKind::Embed, "mock:default?dim=16")->embed(texts);

  auto edit = recording_client(BackendKind::Edit, "mock:default");
  edit->edit(frame, automt::backends::MaskRequest{{"person", "car"}, "roadside"}, "a cyclist", EditMode::Add);
  edit->edit(frame, std::nullopt, "rain", EditMode::Replace);
  EXPECT_THROW(edit->edit(frame, std::nullopt, "a cyclist", EditMode::Add), automt::EditRejected);

  std::vector<double> speed{7.0, 7.0}, steer{0.0, 0.1};
  recording_client(BackendKind::Video, "mock:default")->video(frame, speed, steer, 2);
  recording_client(BackendKind::Predict, "mock:default")->predict(frames);

  std::size_t files = 0;
  for (const auto & entry : std::filesystem::recursive_directory_iterator(AUTOMT_WIRE_RECORDINGS)) {
    if (entry.is_regular_file()) ++files;
  }
  EXPECT_EQ(files, 16u);
}
