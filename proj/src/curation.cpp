#include "reco/curation.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "reco/error.hpp"

namespace reco {

const char* describe(FilterRule rule) noexcept {
  switch (rule) {
    case FilterRule::offensive:
      return "offensive";
    case FilterRule::non_visual:
      return "non_visual";
    case FilterRule::not_leaf:
      return "not_leaf";
    case FilterRule::too_few_images:
      return "too_few_images";
  }
  return "unknown";
}

const char* to_string(RealmStatus status) noexcept {
  switch (status) {
    case RealmStatus::selected:
      return "selected";
    case RealmStatus::rejected_too_small:
      return "rejected_too_small";
    case RealmStatus::rejected_covered:
      return "rejected_covered";
    case RealmStatus::rejected_excluded:
      return "rejected_excluded";
  }
  return "unknown";
}

FilterResult filter_concepts(const Taxonomy& tax, long long min_images) {
  FilterResult out;
  for (std::size_t i = 0; i < tax.size(); ++i) {
    const auto& n = tax.node(i);
    if (n.offensive) {
      out.rejected.push_back({n.id, FilterRule::offensive});
    } else if (n.non_visual) {
      out.rejected.push_back({n.id, FilterRule::non_visual});
    } else if (!tax.is_leaf(i)) {
      out.rejected.push_back({n.id, FilterRule::not_leaf});
    } else if (n.image_count < min_images) {
      out.rejected.push_back({n.id, FilterRule::too_few_images});
    } else {
      out.valid.push_back(n.id);
    }
  }
  return out;
}

std::string filter_report_csv(const FilterResult& result) {
  std::string out = "id,rule,reason\n";
  for (const auto& r : result.rejected) {
    out += r.id + "," + std::to_string(static_cast<int>(r.rule)) + "," + describe(r.rule) + "\n";
  }
  return out;
}

std::vector<RealmSubtree> select_realms(const Taxonomy& tax, const std::vector<std::string>& valid,
                                        const std::vector<std::string>& candidates,
                                        const std::vector<std::string>& excluded,
                                        std::size_t min_classes) {
  std::vector<char> is_valid(tax.size(), 0);
  for (const auto& id : valid) is_valid[tax.index_of(id)] = 1;
  std::unordered_set<std::size_t> excluded_set;
  for (const auto& id : excluded) excluded_set.insert(tax.index_of(id));

  std::set<std::size_t> cand;
  for (const auto& id : candidates) cand.insert(tax.index_of(id));

  struct Pending {
    std::size_t node;
    std::vector<std::size_t> members;  // sorted subtree
    std::vector<std::string> valid_classes;
  };
  std::vector<Pending> pending;
  for (auto c : cand) {
    Pending p{c, tax.subtree(c), {}};
    for (auto m : p.members) {
      if (is_valid[m]) p.valid_classes.push_back(tax.node(m).id);
    }
    pending.push_back(std::move(p));
  }

  std::vector<RealmSubtree> out;
  for (const auto& p : pending) {
    RealmSubtree r{tax.node(p.node).id, p.valid_classes, RealmStatus::selected};
    if (p.valid_classes.size() < min_classes) {
      r.status = RealmStatus::rejected_too_small;
    } else {
      bool covered = false;
      for (const auto& other : pending) {
        if (other.node == p.node || other.valid_classes.size() < min_classes) continue;
        if (std::binary_search(other.members.begin(), other.members.end(), p.node)) {
          covered = true;
          break;
        }
      }
      if (covered) {
        r.status = RealmStatus::rejected_covered;
      } else if (excluded_set.count(p.node)) {
        r.status = RealmStatus::rejected_excluded;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string realms_csv(const std::vector<RealmSubtree>& realms) {
  std::string out = "realm,status,n_valid,valid_classes\n";
  for (const auto& r : realms) {
    out += r.root_concept + "," + to_string(r.status) + "," + std::to_string(r.valid_classes.size()) + ",";
    for (std::size_t i = 0; i < r.valid_classes.size(); ++i) {
      if (i) out += ';';
      out += r.valid_classes[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace reco
