#pragma once

// Parser evaluation: message-level GA/PA, template-level FGA/FTA with their
// precision/recall components, and the granularity distances GGD/PGD.
//
// GGD counts the fewest single-group merges and splits turning one grouping
// into another. Any merge joins two blocks, so it lowers the number of blocks
// of the running join (the coarsest partition refined by every intermediate
// grouping) by at most one, and splits never change it. The running join
// starts at P and must end at or above join(P, Q), hence merges >= |P| -
// |join|, and splits = merges + |Q| - |P|. Merging every block of each
// connected component of the P/Q intersection graph and then splitting it
// into its Q blocks attains the bound, so
//
//     GGD(P, Q) = |P| + |Q| - 2 |join(P, Q)|,
//
// where |join| is the number of connected components of that graph.

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "logmill/errors.hpp"
#include "logmill/model.hpp"

namespace logmill {

struct ParsingResult {
  std::map<LineId, std::string> assignment;      // line -> group id
  std::map<std::string, std::string> templates;  // group id -> template text

  // Later rows overwrite a group's template.
  void add(LineId line, std::string group, std::string tmpl) {
    templates[group] = std::move(tmpl);
    assignment[line] = std::move(group);
  }
};

struct MetricReport {
  double ga = 0, pa = 0;
  double pga = 0, rga = 0, fga = 0;
  double pta = 0, rta = 0, fta = 0;
  long long ggd = 0, pgd = 0;
  std::size_t ng = 0, np = 0, nc = 0, nc_hat = 0;
  std::size_t messages = 0;
};

// Placeholder-normalized template; empty text stays empty.
inline std::string normalized_text(std::string_view t) {
  if (trim(t).empty()) return std::string();
  return normalize_template(t).text;
}

namespace detail {

// Dense view of a pred/gt pair over the common message order.
struct Contingency {
  std::vector<std::string> pred_names, gt_names;
  std::vector<std::size_t> pred_of, gt_of;  // per message
  std::vector<std::size_t> pred_size, gt_size;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> overlap;

  Contingency(const ParsingResult& pred, const ParsingResult& gt) {
    if (pred.assignment.size() != gt.assignment.size()) {
      throw ResultMismatch("line sets differ: " + std::to_string(pred.assignment.size()) + " predicted vs " +
                           std::to_string(gt.assignment.size()) + " ground-truth lines");
    }
    std::map<std::string, std::size_t> pidx, gidx;
    auto index = [](std::map<std::string, std::size_t>& idx, std::vector<std::string>& names,
                    std::vector<std::size_t>& sizes, const std::string& g) {
      auto [it, inserted] = idx.emplace(g, names.size());
      if (inserted) {
        names.push_back(g);
        sizes.push_back(0);
      }
      ++sizes[it->second];
      return it->second;
    };
    auto pi = pred.assignment.begin();
    auto gi = gt.assignment.begin();
    for (; pi != pred.assignment.end(); ++pi, ++gi) {
      if (pi->first != gi->first) {
        throw ResultMismatch("line " + std::to_string(pi->first) + " has no ground-truth counterpart");
      }
      const auto p = index(pidx, pred_names, pred_size, pi->second);
      const auto g = index(gidx, gt_names, gt_size, gi->second);
      pred_of.push_back(p);
      gt_of.push_back(g);
      ++overlap[{p, g}];
    }
  }

  // Ground-truth group whose member set equals predicted group p, if any.
  std::optional<std::size_t> exact_gt(std::size_t p) const {
    const auto lo = overlap.lower_bound({p, 0});
    if (lo == overlap.end() || lo->first.first != p) return std::nullopt;
    const auto next = std::next(lo);
    if (next != overlap.end() && next->first.first == p) return std::nullopt;  // spread over >1 gt groups
    const std::size_t g = lo->first.second;
    if (lo->second == pred_size[p] && lo->second == gt_size[g]) return g;
    return std::nullopt;
  }
};

inline const std::string& template_of(const ParsingResult& r, const std::string& group) {
  static const std::string kEmpty;
  const auto it = r.templates.find(group);
  return it == r.templates.end() ? kEmpty : it->second;
}

inline bool is_variable_token(std::string_view t) { return has_wildcard(t); }

// Harmonic mean of c/p and c/t.
inline double f1(std::size_t c, std::size_t p, std::size_t t) {
  return c ? 2.0 * static_cast<double>(c) / static_cast<double>(p + t) : 0.0;
}

}  // namespace detail

inline double grouping_accuracy(const ParsingResult& pred, const ParsingResult& gt) {
  const detail::Contingency c(pred, gt);
  if (c.pred_of.empty()) return 1.0;
  std::size_t correct = 0;
  for (std::size_t m = 0; m < c.pred_of.size(); ++m) {
    const auto p = c.pred_of[m];
    const auto g = c.gt_of[m];
    if (c.overlap.at({p, g}) == c.pred_size[p] && c.pred_size[p] == c.gt_size[g]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(c.pred_of.size());
}

inline double parsing_accuracy(const ParsingResult& pred, const ParsingResult& gt) {
  const detail::Contingency c(pred, gt);
  if (c.pred_of.empty()) return 1.0;
  std::vector<std::string> pn(c.pred_names.size()), gn(c.gt_names.size());
  for (std::size_t p = 0; p < pn.size(); ++p) pn[p] = normalized_text(detail::template_of(pred, c.pred_names[p]));
  for (std::size_t g = 0; g < gn.size(); ++g) gn[g] = normalized_text(detail::template_of(gt, c.gt_names[g]));
  std::size_t correct = 0;
  for (std::size_t m = 0; m < c.pred_of.size(); ++m) {
    if (pn[c.pred_of[m]] == gn[c.gt_of[m]]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(c.pred_of.size());
}

struct PrecisionRecall {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t correct = 0, predicted = 0, truth = 0;
};

inline PrecisionRecall f_group(const ParsingResult& pred, const ParsingResult& gt) {
  const detail::Contingency c(pred, gt);
  PrecisionRecall r;
  r.predicted = c.pred_names.size();
  r.truth = c.gt_names.size();
  for (std::size_t p = 0; p < r.predicted; ++p) {
    if (c.exact_gt(p)) ++r.correct;
  }
  r.precision = r.predicted ? static_cast<double>(r.correct) / r.predicted : 0.0;
  r.recall = r.truth ? static_cast<double>(r.correct) / r.truth : 0.0;
  r.f1 = detail::f1(r.correct, r.predicted, r.truth);
  return r;
}

inline PrecisionRecall f_template(const ParsingResult& pred, const ParsingResult& gt) {
  const detail::Contingency c(pred, gt);
  PrecisionRecall r;
  r.predicted = c.pred_names.size();
  r.truth = c.gt_names.size();
  for (std::size_t p = 0; p < r.predicted; ++p) {
    const auto g = c.exact_gt(p);
    if (!g) continue;
    if (normalized_text(detail::template_of(pred, c.pred_names[p])) ==
        normalized_text(detail::template_of(gt, c.gt_names[*g]))) {
      ++r.correct;
    }
  }
  r.precision = r.predicted ? static_cast<double>(r.correct) / r.predicted : 0.0;
  r.recall = r.truth ? static_cast<double>(r.correct) / r.truth : 0.0;
  r.f1 = detail::f1(r.correct, r.predicted, r.truth);
  return r;
}

inline long long ggd(const ParsingResult& pred, const ParsingResult& gt) {
  const detail::Contingency c(pred, gt);
  const std::size_t np = c.pred_names.size();
  const std::size_t ng = c.gt_names.size();
  std::vector<std::size_t> parent(np + ng);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = np + ng;
  for (const auto& [pg, count] : c.overlap) {
    const auto a = find(pg.first);
    const auto b = find(np + pg.second);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return static_cast<long long>(np) + static_cast<long long>(ng) - 2 * static_cast<long long>(components);
}

// Static/variable toggles between two space-tokenized templates. A token is
// variable iff it contains `<*>`. Equal lengths compare positionally; other
// lengths are aligned by longest common subsequence and every unmatched
// token costs one.
inline long long toggle_cost(std::string_view a, std::string_view b) {
  const auto ta = split_whitespace(normalized_text(a));
  const auto tb = split_whitespace(normalized_text(b));
  const auto same = [](const std::string& x, const std::string& y) {
    const bool vx = detail::is_variable_token(x);
    const bool vy = detail::is_variable_token(y);
    return vx == vy && (vx || x == y);
  };
  if (ta.size() == tb.size()) {
    long long cost = 0;
    for (std::size_t i = 0; i < ta.size(); ++i) cost += same(ta[i], tb[i]) ? 0 : 1;
    return cost;
  }
  std::vector<std::size_t> prev(tb.size() + 1, 0), cur(tb.size() + 1, 0);
  for (std::size_t i = 1; i <= ta.size(); ++i) {
    for (std::size_t j = 1; j <= tb.size(); ++j) {
      cur[j] = same(ta[i - 1], tb[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<long long>(prev[tb.size()]);
  return static_cast<long long>(ta.size() + tb.size()) - 2 * lcs;
}

inline long long pgd(const ParsingResult& pred, const ParsingResult& gt) {
  const detail::Contingency c(pred, gt);
  long long total = ggd(pred, gt);
  for (const auto& [pg, count] : c.overlap) {
    total += toggle_cost(detail::template_of(pred, c.pred_names[pg.first]),
                         detail::template_of(gt, c.gt_names[pg.second]));
  }
  return total;
}

inline MetricReport evaluate(const ParsingResult& pred, const ParsingResult& gt) {
  MetricReport r;
  r.messages = gt.assignment.size();
  r.ga = grouping_accuracy(pred, gt);
  r.pa = parsing_accuracy(pred, gt);
  const auto fg = f_group(pred, gt);
  const auto ft = f_template(pred, gt);
  r.pga = fg.precision;
  r.rga = fg.recall;
  r.fga = fg.f1;
  r.pta = ft.precision;
  r.rta = ft.recall;
  r.fta = ft.f1;
  r.ng = fg.truth;
  r.np = fg.predicted;
  r.nc = fg.correct;
  r.nc_hat = ft.correct;
  r.ggd = ggd(pred, gt);
  r.pgd = pgd(pred, gt);
  return r;
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  return nlohmann::ordered_json{{"GA", r.ga},   {"PA", r.pa},   {"FGA", r.fga}, {"FTA", r.fta},
                                {"GGD", r.ggd}, {"PGD", r.pgd}, {"PGA", r.pga}, {"RGA", r.rga},
                                {"PTA", r.pta}, {"RTA", r.rta}, {"Ng", r.ng},   {"Np", r.np},
                                {"Nc", r.nc},   {"Nc_hat", r.nc_hat}, {"messages", r.messages}};
}

// Plain-text table, one row per named report, columns GA PA FGA FTA GGD PGD.
inline std::string format_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::size_t name_width = 7;
  for (const auto& [name, r] : rows) name_width = std::max(name_width, name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %7s %7s %7s %7s %7s %7s\n", static_cast<int>(name_width), "dataset", "GA",
                "PA", "FGA", "FTA", "GGD", "PGD");
  out += buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s %7.1f %7.1f %7.1f %7.1f %7lld %7lld\n", static_cast<int>(name_width),
                  name.c_str(), 100.0 * r.ga, 100.0 * r.pa, 100.0 * r.fga, 100.0 * r.fta, r.ggd, r.pgd);
    out += buf;
  }
  return out;
}

}  // namespace logmill
