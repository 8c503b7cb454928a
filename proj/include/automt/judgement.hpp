#pragma once

#include "automt/metamorphic_relation.hpp"

#include <string_view>
#include <vector>

namespace automt::judgement
{

// Pulls the first JSON array out of a judge reply, e.g. `["yes", "no", "yes"]`.
// Throws MalformedJudgement when no array is present or an entry is not yes/no.
std::vector<mr::Answer> parse_answer_array(std::string_view reply);

// A single yes/no verdict: a leading yes/no word, or a one-element array.
mr::Answer parse_single_answer(std::string_view reply);

}  // namespace automt::judgement
