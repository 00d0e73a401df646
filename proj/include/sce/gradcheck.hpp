#pragma once

// Central-difference validation of the tape's analytic gradients.

#include <cstdint>
#include <functional>
#include <vector>

#include "sce/common.hpp"
#include "sce/tensor.hpp"

namespace sce {

// Builds a scalar loss from a leaf tensor, recording on the given graph.
using TensorFn = std::function<Tensor(GradGraph&, const Tensor&)>;

struct GradCheckOptions {
  double h = 1e-5;
  // Coordinates where both gradients are below this magnitude share a
  // denominator floor, so finite-difference noise on truly-zero gradients
  // does not register as disagreement.
  double denom_floor = 1e-6;
  // 0 = check every coordinate; otherwise a seeded subsample of this size.
  std::size_t max_coords = 0;
  std::uint64_t subsample_seed = 0;
  // Kink exclusion (relu at 0, maxpool ties): return true to skip a coordinate.
  std::function<bool(std::size_t)> skip;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_coord = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coords_checked = 0;
};

// Compares the tape gradient of f at x against (f(x+h*e) - f(x-h*e)) / 2h
// per coordinate and reports the worst relative error. Report-only: never
// throws on disagreement.
inline GradCheckReport finite_diff_check(const TensorFn& f, const Tensor& x,
                                         const GradCheckOptions& opts = {}) {
  if (opts.h <= 0.0) throw DataError("finite_diff_check: h must be positive");

  const std::vector<double> base(x.data().begin(), x.data().end());

  Tensor leaf(x.shape(), base, /*requires_grad=*/true);
  GradGraph graph;
  Tensor y = f(graph, leaf);
  if (y.numel() != 1) {
    throw DataError("finite_diff_check: f must be scalar-valued, got shape " + shape_str(y.shape()));
  }
  graph.backward(y);
  const std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());

  auto eval = [&](const std::vector<double>& data) {
    Tensor probe(x.shape(), data, /*requires_grad=*/false);
    GradGraph scratch;
    return f(scratch, probe).value();
  };

  std::vector<std::size_t> coords;
  if (opts.max_coords > 0 && base.size() > opts.max_coords) {
    std::vector<std::size_t> all(base.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rng::Engine eng(rng::mix(opts.subsample_seed, 0xfd));
    for (std::size_t i = 0; i < opts.max_coords; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng::below(eng, all.size() - i));
      std::swap(all[i], all[j]);
    }
    coords.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(opts.max_coords));
  } else {
    coords.resize(base.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  }

  GradCheckReport report;
  std::vector<double> probe = base;
  for (std::size_t i : coords) {
    if (opts.skip && opts.skip(i)) continue;
    probe[i] = base[i] + opts.h;
    const double fp = eval(probe);
    probe[i] = base[i] - opts.h;
    const double fm = eval(probe);
    probe[i] = base[i];
    const double numeric = (fp - fm) / (2.0 * opts.h);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), opts.denom_floor});
    const double rel = std::abs(a - numeric) / denom;
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_coord = i;
      report.analytic_at_worst = a;
      report.numeric_at_worst = numeric;
    }
    ++report.coords_checked;
  }
  return report;
}

}  // namespace sce
