#pragma once

#include <span>
#include <vector>

namespace coopsearch {

double mean(std::span<const double> v);

// Ranks starting at 1; ties share their average rank.
std::vector<double> average_ranks(std::span<const double> v);

// Spearman rank correlation (Pearson correlation of average ranks). Returns
// 0 when either input has no spread.
double spearman(std::span<const double> x, std::span<const double> y);

// P(X >= wins) for X ~ Binomial(n, 1/2): the one-sided sign-test p-value.
double sign_test_p(int wins, int n);

}  // namespace coopsearch
