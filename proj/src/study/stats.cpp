#include "impact/study/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "impact/common/error.hpp"

namespace impact::study {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Sums over tie groups: sum t(t-1), sum t(t-1)(t-2), sum t(t-1)(2t+5).
struct TieSums {
  double v1 = 0, v2 = 0, v3 = 0;
};

TieSums tie_sums(const std::vector<double>& x) {
  std::map<double, double> groups;
  for (double v : x) groups[v] += 1;
  TieSums s;
  for (const auto& [v, t] : groups) {
    s.v1 += t * (t - 1);
    s.v2 += t * (t - 1) * (t - 2);
    s.v3 += t * (t - 1) * (2 * t + 5);
  }
  return s;
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::pair<double, double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const double rho = pearson(average_ranks(x), average_ranks(y));
  if (std::isnan(rho)) return {kNaN, kNaN};
  const double df = static_cast<double>(x.size()) - 2.0;
  if (std::abs(rho) >= 1.0) return {rho, 0.0};
  const double t = rho * std::sqrt(df / ((1.0 - rho) * (1.0 + rho)));
  boost::math::students_t dist(df);
  return {rho, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))};
}

std::pair<double, double> kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double s = concordant - discordant;
  const double denom = std::sqrt((concordant + discordant + tie_x) * (concordant + discordant + tie_y));
  if (denom == 0.0) return {kNaN, kNaN};
  const double tau = std::clamp(s / denom, -1.0, 1.0);

  const double m = static_cast<double>(n);
  const auto tx = tie_sums(x);
  const auto ty = tie_sums(y);
  const double var = (m * (m - 1) * (2 * m + 5) - tx.v3 - ty.v3) / 18.0 +
                     tx.v2 * ty.v2 / (9.0 * m * (m - 1) * (m - 2)) + tx.v1 * ty.v1 / (2.0 * m * (m - 1));
  const double z = s / std::sqrt(var);
  boost::math::normal normal;
  return {tau, 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(z)))};
}

double f1_agreement(const std::vector<double>& human, const std::vector<double>& llm, double human_threshold,
                    double llm_threshold) {
  if (human.size() != llm.size()) throw LengthMismatch(human.size(), llm.size());
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const bool h = human[i] >= human_threshold;
    const bool l = llm[i] >= llm_threshold;
    tp += h && l;
    fp += !h && l;
    fn += h && !l;
  }
  if (tp + fp + fn == 0) return 1.0;
  return 2 * tp / (2 * tp + fp + fn);
}

AgreementStats agreement_stats(const std::vector<double>& human, const std::vector<double>& llm,
                               const std::string& metric, double human_threshold, double llm_threshold) {
  if (human.size() != llm.size()) throw LengthMismatch(human.size(), llm.size());
  if (human.size() < 3) throw PreconditionError("agreement needs at least three paired scores");
  AgreementStats s;
  s.metric = metric;
  s.n = human.size();
  std::tie(s.spearman, s.spearman_p) = spearman(human, llm);
  std::tie(s.kendall_tau, s.kendall_p) = kendall_tau_b(human, llm);
  s.f1_agreement = f1_agreement(human, llm, human_threshold, llm_threshold);
  return s;
}

void to_json(nlohmann::json& j, const AgreementStats& s) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  j = {{"metric", s.metric},
       {"n", s.n},
       {"spearman", num(s.spearman)},
       {"spearman_p", num(s.spearman_p)},
       {"kendall_tau", num(s.kendall_tau)},
       {"kendall_p", num(s.kendall_p)},
       {"f1_agreement", s.f1_agreement}};
}

}  // namespace impact::study
