#include "automt/csv.hpp"
#include "automt/error.hpp"
#include "automt/image.hpp"
#include "automt/io.hpp"
#include "automt/numeric.hpp"
#include "automt/parallel.hpp"
#include "automt/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using automt::testing::TempDir;

TEST(Text, CanonicalizeLowersTrimsAndCollapses)
{
  EXPECT_EQ(automt::text::canonicalize("  Foggy \t  DAY \n"), "foggy day");
  EXPECT_EQ(automt::text::canonicalize(""), "");
}

TEST(Text, ContainsWordRespectsBoundaries)
{
  EXPECT_TRUE(automt::text::contains_word("a red light ahead", "red light"));
  EXPECT_FALSE(automt::text::contains_word("a busy road", "bus"));
  EXPECT_TRUE(automt::text::contains_word("bus", "bus"));
  EXPECT_FALSE(automt::text::contains_word("bus", ""));
}

TEST(Text, Fnv1aKnownVectors)
{
  EXPECT_EQ(automt::text::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(automt::text::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(automt::text::fnv1a32(""), 0x811c9dc5U);
  EXPECT_EQ(automt::text::fnv1a32("a"), 0xe40c292cU);
}

TEST(Text, Base64RoundTripsArbitraryBytes)
{
  std::mt19937 rng(3);
  for (int n = 0; n < 40; ++n) {
    std::string bytes(static_cast<std::size_t>(n), '\0');
    for (auto & c : bytes) c = static_cast<char>(rng() & 0xFF);
    EXPECT_EQ(automt::text::base64_decode(automt::text::base64_encode(bytes)), bytes);
  }
  EXPECT_EQ(automt::text::base64_encode("foobar"), "Zm9vYmFy");
  EXPECT_EQ(automt::text::base64_encode("fo"), "Zm8=");
}

TEST(Text, SplitLinesHandlesCrLf)
{
  auto lines = automt::text::split_lines("a\r\nb\nc");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "c");
}

TEST(Io, AtomicWriteAndJsonlRoundTrip)
{
  TempDir dir;
  auto path = dir.path() / "sub" / "rows.jsonl";
  std::vector<nlohmann::json> rows{{{"b", 1}, {"a", "x"}}, {{"k", nlohmann::json::array({1, 2})}}};
  automt::io::write_jsonl(path, rows);
  EXPECT_EQ(automt::io::read_jsonl(path), rows);
  EXPECT_EQ(automt::io::read_file(path), "{\"a\":\"x\",\"b\":1}\n{\"k\":[1,2]}\n");
  automt::io::append_jsonl(path, {{"z", true}});
  EXPECT_EQ(automt::io::read_jsonl(path).size(), 3u);
}

TEST(Io, MissingFileIsIoError)
{
  TempDir dir;
  EXPECT_THROW(automt::io::read_file(dir.path() / "nope"), automt::IoError);
  EXPECT_THROW(automt::io::read_jsonl(dir.path() / "nope"), automt::IoError);
}

TEST(Io, BadJsonlLineIsParseError)
{
  TempDir dir;
  automt::io::write_file_atomic(dir.path() / "x.jsonl", "{}\n{oops\n");
  EXPECT_THROW(automt::io::read_jsonl(dir.path() / "x.jsonl"), automt::ParseError);
}

TEST(Csv, QuotedFieldsRoundTrip)
{
  automt::csv::Table table{{"a", "b"}, {{"plain", "with,comma"}, {"say \"hi\"", "multi\nline"}}};
  auto parsed = automt::csv::parse(automt::csv::write(table));
  EXPECT_EQ(parsed.header, table.header);
  EXPECT_EQ(parsed.rows, table.rows);
}

TEST(Csv, UnterminatedQuoteThrows)
{
  EXPECT_THROW(automt::csv::parse("a,b\n\"x,y\n"), automt::ParseError);
}

TEST(Csv, CrLfRows)
{
  auto records = automt::csv::parse_records("a,b\r\n1,2\r\n");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1][1], "2");
}

TEST(Image, PngRoundTrip)
{
  automt::Image image(7, 5, {1, 2, 3});
  image.set(3, 2, {250, 0, 9});
  auto decoded = automt::decode_png(automt::encode_png(image));
  EXPECT_EQ(decoded, image);
}

TEST(Image, CorruptPngThrows)
{
  EXPECT_THROW(automt::decode_png("not a png"), automt::Error);
}

TEST(Numeric, MedianEvenOddAndEmpty)
{
  std::vector<double> odd{3, 1, 2};
  std::vector<double> even{4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(automt::median(odd), 2.0);
  EXPECT_DOUBLE_EQ(automt::median(even), 2.5);
  EXPECT_THROW(automt::median(std::span<const double>{}), automt::EmptySeries);
}

TEST(Parallel, ResultsInIndexOrder)
{
  auto out = automt::parallel_map(100, 8, [](std::size_t i) {
    std::this_thread::sleep_for(std::chrono::microseconds((100 - i) * 10));
    return i * i;
  });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], i * i);
}

TEST(Parallel, LowestFailingIndexWins)
{
  try {
    automt::parallel_map(20, 4, [](std::size_t i) -> int {
      if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
      return 0;
    });
    FAIL();
  } catch (const std::runtime_error & e) {
    EXPECT_STREQ(e.what(), "7");
  }
}
