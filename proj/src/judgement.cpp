#include "automt/judgement.hpp"

#include "automt/error.hpp"
#include "automt/text.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <optional>

namespace automt::judgement
{

namespace
{
std::optional<mr::Answer> to_answer(const nlohmann::json & value)
{
  if (value.is_boolean()) return value.get<bool>() ? mr::Answer::Yes : mr::Answer::No;
  if (!value.is_string()) return std::nullopt;
  auto word = text::canonicalize(value.get<std::string>());
  if (word == "yes") return mr::Answer::Yes;
  if (word == "no") return mr::Answer::No;
  return std::nullopt;
}
}  // namespace

std::vector<mr::Answer> parse_answer_array(std::string_view reply)
{
  auto open = reply.find('[');
  while (open != std::string_view::npos) {
    auto close = reply.find(']', open);
    if (close == std::string_view::npos) break;
    auto parsed = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) {
      std::vector<mr::Answer> answers;
      for (const auto & item : parsed) {
        auto answer = to_answer(item);
        if (!answer) throw MalformedJudgement("judge answer '" + item.dump() + "' is not yes/no");
        answers.push_back(*answer);
      }
      return answers;
    }
    open = reply.find('[', open + 1);
  }
  throw MalformedJudgement("judge reply carries no JSON answer array");
}

mr::Answer parse_single_answer(std::string_view reply)
{
  auto trimmed = text::trim(reply);
  if (!trimmed.empty() && trimmed.front() == '[') {
    auto answers = parse_answer_array(trimmed);
    if (answers.size() != 1) throw MalformedJudgement("expected a single yes/no answer");
    return answers.front();
  }
  std::string word;
  for (char c : trimmed) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (word == "yes") return mr::Answer::Yes;
  if (word == "no") return mr::Answer::No;
  throw MalformedJudgement("judge reply is neither yes nor no");
}

}  // namespace automt::judgement
