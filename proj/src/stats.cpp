#include "automt/stats.hpp"

#include "automt/csv.hpp"
#include "automt/error.hpp"
#include "automt/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace automt::stats
{

void validate(const RatingTable & table)
{
  if (table.categories < 2) throw PreconditionError("rating scale needs at least two categories");
  if (table.ratings.empty()) throw PreconditionError("rating table has no items");
  auto raters = table.ratings.front().size();
  if (raters < 2) throw PreconditionError("rating table needs at least two raters");
  for (const auto & item : table.ratings) {
    if (item.size() != raters) throw PreconditionError("rating table is not rectangular");
    for (int r : item) {
      if (r < 1 || r > table.categories) {
        throw PreconditionError("rating " + std::to_string(r) + " outside 1.." + std::to_string(table.categories));
      }
    }
  }
}

KappaWeights weights_from_string(std::string_view value)
{
  auto v = text::canonicalize(value);
  if (v == "linear") return KappaWeights::Linear;
  if (v == "quadratic") return KappaWeights::Quadratic;
  throw UsageError("unknown kappa weights '" + std::string(value) + "'");
}

double agreement_weight(int i, int j, int categories, KappaWeights weights)
{
  double d = std::abs(i - j) / static_cast<double>(categories - 1);
  return weights == KappaWeights::Linear ? 1.0 - d : 1.0 - d * d;
}

double weighted_fleiss_kappa(const RatingTable & table, KappaWeights weights)
{
  validate(table);
  const int c = table.categories;
  const auto n_items = table.ratings.size();
  const auto r = static_cast<double>(table.ratings.front().size());

  std::vector<std::vector<double>> w(c, std::vector<double>(c));
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) w[i][j] = agreement_weight(i + 1, j + 1, c, weights);
  }

  std::vector<double> pi(c, 0.0);
  double observed = 0.0;
  std::vector<double> counts(c);
  for (const auto & item : table.ratings) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (int rating : item) counts[rating - 1] += 1.0;
    double agree = 0.0;
    for (int k = 0; k < c; ++k) {
      if (counts[k] == 0.0) continue;
      double weighted = 0.0;
      for (int l = 0; l < c; ++l) weighted += w[k][l] * counts[l];
      agree += counts[k] * (weighted - 1.0);
      pi[k] += counts[k] / r;
    }
    observed += agree / (r * (r - 1.0));
  }
  observed /= static_cast<double>(n_items);
  for (auto & p : pi) p /= static_cast<double>(n_items);

  double expected = 0.0;
  for (int k = 0; k < c; ++k) {
    for (int l = 0; l < c; ++l) expected += w[k][l] * pi[k] * pi[l];
  }
  double expected_disagreement = 1.0 - expected;
  double observed_disagreement = 1.0 - observed;
  if (observed_disagreement == 0.0) return 1.0;
  if (expected_disagreement <= 0.0) {
    throw DegenerateMarginals("expected disagreement is zero; kappa is undefined");
  }
  return 1.0 - observed_disagreement / expected_disagreement;
}

namespace
{

// Continued fraction for I_x(a, b); converges for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x)
{
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  return h;
}

double mean_of(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean)
{
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x)
{
  if (!(a > 0.0) || !(b > 0.0)) throw PreconditionError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df)
{
  if (!(df > 0.0)) throw PreconditionError("t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b)
{
  if (a.size() < 2 || b.size() < 2) throw PreconditionError("Welch t-test needs at least two values per sample");
  double ma = mean_of(a), mb = mean_of(b);
  double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double sa = va / na, sb = vb / nb;
  WelchResult result;
  double se2 = sa + sb;
  if (se2 == 0.0) {
    result.degenerate = true;
    result.df = na + nb - 2.0;
    if (ma == mb) {
      result.t = 0.0;
      result.p = 1.0;
    } else {
      result.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      result.p = 0.0;
    }
    return result;
  }
  result.t = (ma - mb) / std::sqrt(se2);
  result.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  result.p = student_t_two_sided(result.t, result.df);
  return result;
}

RatingTable parse_rating_csv(std::string_view text_in, int categories)
{
  RatingTable table;
  table.categories = categories;
  for (const auto & record : csv::parse_records(text_in)) {
    std::vector<int> row;
    bool numeric = true;
    for (const auto & field : record) {
      auto f = text::trim(field);
      int v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (table.ratings.empty()) continue;  // header row
      throw ParseError("non-integer rating in rating table");
    }
    table.ratings.push_back(std::move(row));
  }
  validate(table);
  return table;
}

std::vector<double> parse_samples(std::string_view text_in)
{
  std::vector<double> out;
  std::string token;
  auto flush = [&]() {
    auto t = text::trim(token);
    token.clear();
    if (t.empty()) return;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw ParseError("sample value '" + t + "' is not a number");
    out.push_back(v);
  };
  for (char c : text_in) {
    if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return out;
}

nlohmann::json to_json(const WelchResult & r)
{
  auto finite_or_string = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  return nlohmann::json{{"t", finite_or_string(r.t)}, {"df", r.df}, {"p", r.p}, {"degenerate", r.degenerate}};
}

}  // namespace automt::stats
