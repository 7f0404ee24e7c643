#include "tdid/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "tdid/error.hpp"
#include "tdid/estimators.hpp"
#include "tdid/rng.hpp"

namespace tdid {

std::size_t MonteCarloResult::failures() const noexcept {
  return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(),
                                                [](const ReplicationStatus& s) { return !s.ok; }));
}

namespace {

MonteCarloResult run(const DgpSpec& spec, int replications, const EstimatorConfig& config,
                     bool parallel) {
  if (replications < 1) throw Error(ErrorKind::Configuration, "replications must be at least 1");
  check_spec(spec);
  const auto reps = static_cast<std::size_t>(replications);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MonteCarloResult out;
  out.estimates_naive.assign(reps, nan);
  out.estimates_reweighted.assign(reps, nan);
  out.se_naive.assign(reps, nan);
  out.se_reweighted.assign(reps, nan);
  out.flags.resize(reps);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int r = 0; r < replications; ++r) {
    const auto slot = static_cast<std::size_t>(r);
    DgpSpec rep = spec;
    rep.seed = derive_seed(spec.seed, slot);
    try {
      const PanelDataset sample = simulate_sample(rep);
      const NuisanceSet theta = fit_nuisances(sample, FitMode::ScoreSet, config.nuisance);
      const CellTable cells = cell_table(sample);
      const std::array<ScoreKind, 3> kinds{ScoreKind::DR_A, ScoreKind::DR_B, ScoreKind::WDR};
      // Already inside a parallel region: the per-unit kernel runs serially.
      const std::vector<ScoreVector> s = score_vectors_serial(kinds, sample, cells, theta, config.scores);
      const double tau = s[0].mean() - s[2].mean();
      const std::vector<double> eta = influence_tau_t2(sample, cells, s[0].values, s[2].values, tau);
      out.estimates_reweighted[slot] = tau;
      out.se_reweighted[slot] = variance(eta).se;

      const double mu_a = s[0].mean();
      const double mu_b = s[1].mean();
      std::vector<double> eta_naive(sample.size());
      for (std::size_t i = 0; i < sample.size(); ++i) {
        const PanelUnit& u = sample.unit(i);
        const double wa = u.cell() == Cell::A2 ? 1.0 / cells.share(Cell::A2) : 0.0;
        const double wb = u.cell() == Cell::B2 ? 1.0 / cells.share(Cell::B2) : 0.0;
        eta_naive[i] = (s[0].values[i] - wa * mu_a) - (s[1].values[i] - wb * mu_b);
      }
      out.estimates_naive[slot] = mu_a - mu_b;
      out.se_naive[slot] = variance(eta_naive).se;
    } catch (const std::exception& e) {
      out.flags[slot].ok = false;
      out.flags[slot].message = e.what();
    }
  }

  const std::size_t failed = out.failures();
  if (failed * 100 > reps) {
    std::ostringstream msg;
    msg << failed << " of " << reps << " replications failed (more than 1%); first failure: ";
    for (const ReplicationStatus& s : out.flags) {
      if (!s.ok) {
        msg << s.message;
        break;
      }
    }
    throw Error(ErrorKind::Estimation, msg.str());
  }
  return out;
}

EstimatorSummary summarize_one(const std::vector<double>& est, const std::vector<double>& se,
                               const std::vector<ReplicationStatus>& flags) {
  EstimatorSummary s;
  double sum = 0.0;
  double se_sum = 0.0;
  for (std::size_t r = 0; r < est.size(); ++r) {
    if (!flags[r].ok) continue;
    sum += est[r];
    se_sum += se[r];
    ++s.ok;
  }
  if (s.ok == 0) return s;
  s.mean = sum / static_cast<double>(s.ok);
  s.mean_se = se_sum / static_cast<double>(s.ok);
  if (s.ok > 1) {
    double ss = 0.0;
    for (std::size_t r = 0; r < est.size(); ++r)
      if (flags[r].ok) ss += (est[r] - s.mean) * (est[r] - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.ok - 1));
  }
  return s;
}

}  // namespace

MonteCarloResult run_monte_carlo(const DgpSpec& spec, int replications, const EstimatorConfig& config) {
  return run(spec, replications, config, true);
}

MonteCarloResult run_monte_carlo_serial(const DgpSpec& spec, int replications,
                                        const EstimatorConfig& config) {
  return run(spec, replications, config, false);
}

MonteCarloSummary summarize(const MonteCarloResult& result) {
  MonteCarloSummary s;
  s.replications = result.replications();
  s.failures = result.failures();
  s.naive = summarize_one(result.estimates_naive, result.se_naive, result.flags);
  s.reweighted = summarize_one(result.estimates_reweighted, result.se_reweighted, result.flags);
  s.degenerate = s.reweighted.ok < 2;
  return s;
}

void export_histogram(const MonteCarloResult& result, const std::filesystem::path& path, int bins) {
  if (bins < 1) throw Error(ErrorKind::Configuration, "histogram needs at least one bin");
  if (result.replications() == 0) throw Error(ErrorKind::Configuration, "empty Monte-Carlo result");
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << "estimator_label,bin_left,bin_right,count\n" << std::setprecision(17);

  auto emit = [&](const char* label, const std::vector<double>& est) {
    std::vector<double> v;
    for (std::size_t r = 0; r < est.size(); ++r)
      if (result.flags[r].ok) v.push_back(est[r]);
    if (v.empty()) return;
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / bins;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double x : v) {
      auto k = static_cast<std::ptrdiff_t>(std::floor((x - lo) / width));
      k = std::clamp<std::ptrdiff_t>(k, 0, bins - 1);
      ++counts[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < bins; ++k) {
      const double left = lo + k * width;
      const double right = k + 1 == bins ? hi : lo + (k + 1) * width;
      out << label << ',' << left << ',' << right << ',' << counts[static_cast<std::size_t>(k)] << '\n';
    }
  };
  emit("naive_DR_A_minus_DR_B", result.estimates_naive);
  emit("reweighted_DR_A_minus_WDR_B", result.estimates_reweighted);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace tdid
