#pragma once

#include <algorithm>
#include <cmath>

#include "cayley/model.hpp"
#include "cayley/oracle.hpp"

namespace cayley::testing {

struct FidelityReport {
  double max_relative_error = 0.0;  ///< over entries with a positive exact score
  /// Largest learned score on an exact-zero entry, as a fraction of the
  /// largest exact score of the same (x, t).
  double max_zero_fraction = 0.0;
  int checked = 0;

  bool within(double tolerance) const {
    return checked > 0 && max_relative_error <= tolerance && max_zero_fraction <= tolerance;
  }
};

/// Compares learned and exact scores at every (x, t, a) with p_t(x) > min_mass.
inline FidelityReport score_fidelity(const GraphSpecPtr& spec, const ProbabilityTables& tables,
                                     const ModelParameters& model, double min_mass = 0.01) {
  ModelScore learned(spec, model);
  const std::size_t n = spec->num_generators();
  std::vector<double> s(n);
  FidelityReport report;
  for (int t = 1; t <= tables.horizon(); ++t) {
    for (std::size_t i = 0; i < tables.size(); ++i) {
      if (tables.p_by_index(t, i) <= min_mass) continue;
      const auto& x = tables.states()[i];
      learned.scores(std::span<const State>(&x, 1), t, s);
      double top = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        top = std::max(top, exact_score(tables, *spec, x, t, static_cast<Move>(a)));
      }
      for (std::size_t a = 0; a < n; ++a) {
        const double e = exact_score(tables, *spec, x, t, static_cast<Move>(a));
        if (e > 0.0) {
          report.max_relative_error = std::max(report.max_relative_error, std::abs(s[a] - e) / e);
        } else {
          report.max_zero_fraction = std::max(report.max_zero_fraction, s[a] / top);
        }
        ++report.checked;
      }
    }
  }
  return report;
}

}  // namespace cayley::testing
