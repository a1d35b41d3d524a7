#pragma once

#include <string>
#include <vector>

#include "reco/taxonomy.hpp"

namespace reco {

/// Concept-filtering rules, in the order they are checked.
enum class FilterRule : int {
  offensive = 1,
  non_visual = 2,
  not_leaf = 3,
  too_few_images = 4,
};

const char* describe(FilterRule rule) noexcept;

struct Rejection {
  std::string id;
  FilterRule rule;
};

struct FilterResult {
  std::vector<std::string> valid;
  std::vector<Rejection> rejected;  // first failing rule per concept
};

/// Keeps concepts that are not offensive, are visual, are leaves, and have at
/// least `min_images` raw samples. Visits nodes in taxonomy order.
FilterResult filter_concepts(const Taxonomy& tax, long long min_images = 200);

std::string filter_report_csv(const FilterResult& result);

enum class RealmStatus { selected, rejected_too_small, rejected_covered, rejected_excluded };

const char* to_string(RealmStatus status) noexcept;

struct RealmSubtree {
  std::string root_concept;
  std::vector<std::string> valid_classes;
  RealmStatus status = RealmStatus::rejected_too_small;
};

/// Applies the realm principles in order to each candidate sub-tree:
///   1. it must hold at least `min_classes` valid concepts;
///   2. it must not sit inside the sub-tree of another candidate that passed 1;
///   3. it must not be on the `excluded` list.
/// A candidate's status is its first failing principle. Output is sorted by
/// taxonomy order, so it does not depend on the order of `candidates`.
std::vector<RealmSubtree> select_realms(const Taxonomy& tax, const std::vector<std::string>& valid,
                                        const std::vector<std::string>& candidates,
                                        const std::vector<std::string>& excluded,
                                        std::size_t min_classes = 20);

std::string realms_csv(const std::vector<RealmSubtree>& realms);

}  // namespace reco
