#pragma once

#include <nlohmann/json.hpp>

#include <span>
#include <string_view>
#include <vector>

namespace automt::stats
{

/// items x raters matrix of ordinal ratings in 1..categories.
struct RatingTable
{
  std::vector<std::vector<int>> ratings;
  int categories = 5;
};

/// Rectangular, at least one item and two raters, every rating in 1..C, C >= 2.
void validate(const RatingTable & table);

enum class KappaWeights { Linear, Quadratic };

KappaWeights weights_from_string(std::string_view value);

/// Agreement weight of categories i and j (1-based).
double agreement_weight(int i, int j, int categories, KappaWeights weights);

/// 1 - observed/expected weighted disagreement. Returns exactly 1 when every
/// item is unanimous; throws DegenerateMarginals when expected disagreement is
/// zero but observed disagreement is not.
double weighted_fleiss_kappa(const RatingTable & table, KappaWeights weights = KappaWeights::Linear);

struct WelchResult
{
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  bool degenerate = false;  // both samples have zero variance
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b) by continued fraction (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided Student-t tail probability P(|T| >= |t|) for df degrees of freedom.
double student_t_two_sided(double t, double df);

RatingTable parse_rating_csv(std::string_view text, int categories);
std::vector<double> parse_samples(std::string_view text);

nlohmann::json to_json(const WelchResult & result);

}  // namespace automt::stats
