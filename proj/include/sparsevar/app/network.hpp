#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sparsevar/app/ingest.hpp"
#include "sparsevar/eval.hpp"
#include "sparsevar/fit_result.hpp"

namespace sparsevar::app {

// Directed cross-category effect: `channel` of `source` moves sales of
// `target` in `support` of `stores` fits.
struct Edge {
  std::string source;
  std::string target;
  Channel channel = Channel::sales;
  int support = 0;
  int stores = 0;
};

struct Network {
  Channel channel = Channel::sales;
  int stores = 0;
  // Categories with a sales equation, in column order.
  std::vector<std::string> categories;
  // Cross-category edges supported by a strict majority of stores.
  std::vector<Edge> edges;
  // Within-category effects (source == target) with their support, kept out
  // of the edge list.
  std::vector<Edge> within;

  int influence(const std::string& category) const;       // out-degree
  int responsiveness(const std::string& category) const;  // in-degree
};

// True when any lag coefficient of `predictor` in the equation of `response`
// is nonzero.
bool group_active(const FitResult& fit, int response, int predictor);

// Edge A -> B iff the group (equation: B__sales, predictor: A__<channel>) is
// active in more than half of the fits. Throws DataError when the fits do not
// share series names.
Network extract_network(const std::vector<FitResult>& fits, Channel channel);

// Share of active groups among within-category and cross-category effects of
// `channel` on sales, pooled over stores.
struct Prevalence {
  Channel channel = Channel::sales;
  double within = 0.0;
  double cross = 0.0;
};
Prevalence prevalence(const std::vector<FitResult>& fits, Channel channel);

// Kendall's W across stores of the per-store out-degrees (influence) and
// in-degrees (responsiveness) of every category.
struct DegreeConcordance {
  Channel channel = Channel::sales;
  eval::ConcordanceResult influence;
  eval::ConcordanceResult responsiveness;
};
DegreeConcordance degree_concordance(const std::vector<FitResult>& fits, Channel channel);

void write_edges_csv(std::ostream& out, const std::vector<Network>& networks);
void write_degrees_csv(std::ostream& out, const std::vector<Network>& networks);
void write_graphml(std::ostream& out, const std::vector<Network>& networks);
void write_dot(std::ostream& out, const std::vector<Network>& networks);

}  // namespace sparsevar::app
