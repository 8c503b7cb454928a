#pragma once

#include "automt/backends/scene_tag.hpp"
#include "automt/image.hpp"
#include "automt/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace automt::synth
{

struct CorpusOptions
{
  std::size_t cases = 12;
  std::size_t frames = 8;
  int width = 96;
  int height = 64;
  std::uint64_t seed = 0;
};

struct FrameSpec
{
  std::string case_id;
  std::uint8_t road = 0;
  std::uint8_t weather = 0;
  std::uint8_t time = 0;
};

/// A drawn road scene whose bottom row carries the scene tag for the frame.
Image render_frame(const FrameSpec & spec, std::size_t frame_index, float speed_mps, float steering_rad,
                   int width, int height, std::uint64_t seed);

/// Builds one in-memory case. Roads cycle through the tag table by case
/// number; telemetry values are multiples of 1/16 m/s and 1/64 rad, so they
/// survive the float scene tag exactly.
scene::SourceTestCase make_case(std::size_t number, const CorpusOptions & options);

/// Writes case_NNN/frame_%03d.png and telemetry.json for every case.
std::vector<std::string> write_corpus(const std::filesystem::path & directory, const CorpusOptions & options);

void write_case(const std::filesystem::path & directory, const scene::SourceTestCase & test_case);

}  // namespace automt::synth
