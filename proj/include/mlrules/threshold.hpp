#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlrules/seco.hpp"
#include "mlrules/theory.hpp"

namespace mlrules {

/// Scores each selected rule on the entire training set with the selection heuristic.
std::vector<ScoredRule> score_full_data(const SelectionTrace& trace, std::span<const Rule> rules,
                                        const MultiLabelDataset& dataset, const HeuristicSpec& spec);
std::vector<ScoredRule> score_full_data(const SelectionTrace& trace, std::span<const Rule> rules,
                                        const CoverageMatrix& coverage, const HeuristicSpec& spec);

/// Number of rules that must survive: ceil(retention * n), clamped to [1, n].
std::size_t retained_target(double retention, std::size_t n);

/// Largest phi with |{h >= phi}| >= ceil(retention * n), i.e. the k-th largest score.
/// Throws ConfigError on an empty multiset or retention outside (0, 1].
double threshold_for_retention(std::span<const double> scores, double retention);

/// Keeps rules with score >= phi.
Theory apply_threshold(Theory theory, double phi);

}  // namespace mlrules
