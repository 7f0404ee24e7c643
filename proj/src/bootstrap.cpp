#include "tdid/bootstrap.hpp"

#include <cmath>
#include <exception>
#include <sstream>

#include "tdid/error.hpp"
#include "tdid/rng.hpp"

namespace tdid {

PanelDataset bootstrap_resample(const PanelDataset& dataset, std::uint64_t seed, int replicate,
                                std::size_t& attempts, std::size_t max_attempts) {
  const std::size_t n = dataset.size();
  const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(replicate));
  for (std::uint64_t k = 0;; ++k) {
    if (attempts >= max_attempts) {
      std::ostringstream msg;
      msg << "bootstrap: gave up after " << attempts
          << " resamples with an empty cell; cells are too small to resample";
      throw Error(ErrorKind::Estimation, msg.str());
    }
    ++attempts;
    const CounterRng rng(derive_seed(rep_seed, k));
    std::vector<PanelUnit> units;
    units.reserve(n);
    std::array<std::size_t, 4> counts{};
    for (std::size_t j = 0; j < n; ++j) {
      const auto pick = std::min(n - 1, static_cast<std::size_t>(rng.uniform(j) * static_cast<double>(n)));
      units.push_back(dataset.unit(pick));
      ++counts[index(units.back().cell())];
    }
    if (counts[0] && counts[1] && counts[2] && counts[3]) return dataset.with_units(std::move(units));
  }
}

namespace {

BootstrapResult run(const PanelDataset& dataset, const VectorStatistic& statistic,
                    const BootstrapConfig& config, bool parallel) {
  if (config.replications < 1)
    throw Error(ErrorKind::Configuration, "bootstrap replications must be at least 1");
  const int reps = config.replications;
  const std::size_t cap = 10 * static_cast<std::size_t>(reps);

  BootstrapResult out;
  out.draws.resize(static_cast<std::size_t>(reps));
  std::vector<std::size_t> attempts(static_cast<std::size_t>(reps), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int b = 0; b < reps; ++b) {
    const auto slot = static_cast<std::size_t>(b);
    try {
      const PanelDataset resample = bootstrap_resample(dataset, config.seed, b, attempts[slot], cap);
      out.draws[slot] = statistic(resample);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t a : attempts) out.attempts += a;
  if (out.attempts > cap) {
    throw Error(ErrorKind::Estimation,
                "bootstrap: more than 10 x replications resamples needed to avoid empty cells");
  }

  const std::size_t k = out.draws.front().size();
  out.se.assign(k, 0.0);
  if (reps < 2) return out;
  for (std::size_t j = 0; j < k; ++j) {
    double mean = 0.0;
    for (const auto& d : out.draws) mean += d[j];
    mean /= reps;
    double ss = 0.0;
    for (const auto& d : out.draws) ss += (d[j] - mean) * (d[j] - mean);
    out.se[j] = std::sqrt(ss / (reps - 1));
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap(const PanelDataset& dataset, const VectorStatistic& statistic,
                          const BootstrapConfig& config) {
  return run(dataset, statistic, config, true);
}

BootstrapResult bootstrap_serial(const PanelDataset& dataset, const VectorStatistic& statistic,
                                 const BootstrapConfig& config) {
  return run(dataset, statistic, config, false);
}

double bootstrap_se(const PanelDataset& dataset, const Statistic& statistic,
                    const BootstrapConfig& config) {
  const VectorStatistic wrapped = [&](const PanelDataset& d) { return std::vector<double>{statistic(d)}; };
  return bootstrap(dataset, wrapped, config).se.front();
}

}  // namespace tdid
