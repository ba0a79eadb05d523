#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace impact::study {

struct AgreementStats {
  std::string metric;
  std::size_t n = 0;
  double spearman = 0.0;
  double spearman_p = 1.0;
  double kendall_tau = 0.0;  // tau-b
  double kendall_p = 1.0;
  double f1_agreement = 0.0;
};

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& x);

/// Pearson correlation of the average ranks; two-sided p from Student's t
/// with n - 2 degrees of freedom. NaN for a constant vector.
std::pair<double, double> spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Kendall tau-b; two-sided p from the tie-corrected normal approximation.
std::pair<double, double> kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

/// Both vectors binarized (score >= threshold is positive), F1 of the LLM
/// labels against the human labels. 1.0 when neither side has a positive.
double f1_agreement(const std::vector<double>& human, const std::vector<double>& llm, double human_threshold,
                    double llm_threshold);

/// LengthMismatch for unequal lengths; PreconditionError below three pairs.
AgreementStats agreement_stats(const std::vector<double>& human, const std::vector<double>& llm,
                               const std::string& metric, double human_threshold = 0.5, double llm_threshold = 0.5);

void to_json(nlohmann::json& j, const AgreementStats& s);

}  // namespace impact::study
