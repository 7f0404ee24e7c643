#include "tdid/nuisance.hpp"

#include <cmath>

#include "tdid/error.hpp"

namespace tdid {

std::vector<double> CovariateBasis::apply(std::span<const double> x) const {
  if (!expand) return {x.begin(), x.end()};
  return expand(x);
}

Eigen::MatrixXd CovariateBasis::apply(const PanelDataset& dataset) const {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  if (!expand) return dataset.covariate_matrix();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  const std::vector<double> first = apply(dataset.unit(0).covariates);
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(first.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<double> row = apply(dataset.unit(static_cast<std::size_t>(i)).covariates);
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

CovariateBasis basis_by_name(const std::string& name) {
  if (name == "linear") return {};
  if (name == "quadratic") {
    CovariateBasis b;
    b.name = name;
    b.expand = [](std::span<const double> x) {
      std::vector<double> out(x.begin(), x.end());
      for (double v : x) out.push_back(v * v);
      return out;
    };
    return b;
  }
  throw Error(ErrorKind::Configuration,
              "unknown covariate transform '" + name + "' (expected linear or quadratic)");
}

namespace {

std::vector<std::size_t> to_labels(std::span<const Cell> cells) {
  std::vector<std::size_t> labels(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) labels[i] = index(cells[i]);
  return labels;
}

}  // namespace

PropensityModel fit_logistic_multinomial(const Eigen::MatrixXd& covariates,
                                         std::span<const Cell> cell_labels,
                                         const LogitOptions& options) {
  const std::vector<std::size_t> labels = to_labels(cell_labels);
  MultinomialFit fit =
      fit_multinomial_logit(covariates, labels, 4, index(Cell::BInf), options, "propensity");
  PropensityModel model;
  model.kind = PropensityKind::Multinomial4;
  model.coefficients = std::move(fit.coefficients);
  model.iterations = fit.iterations;
  model.loglik_trace = std::move(fit.loglik_trace);
  return model;
}

PropensityModel fit_logistic_separate_binary(const Eigen::MatrixXd& covariates,
                                             std::span<const Cell> cell_labels,
                                             const LogitOptions& options) {
  PropensityModel model;
  model.kind = PropensityKind::SeparateBinary;
  model.coefficients = Eigen::MatrixXd::Zero(4, covariates.cols() + 1);
  for (Cell c : kCells) {
    std::vector<std::size_t> labels(cell_labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = cell_labels[i] == c ? 1 : 0;
    MultinomialFit fit = fit_multinomial_logit(covariates, labels, 2, 0, options,
                                               "propensity " + std::string(cell_label(c)));
    model.coefficients.row(static_cast<Eigen::Index>(index(c))) = fit.coefficients.row(1);
    model.iterations += fit.iterations;
  }
  return model;
}

PropensityModel constant_propensity(const std::array<double, 4>& shares) {
  PropensityModel model;
  model.kind = PropensityKind::Multinomial4;
  model.intercept_only = true;
  model.coefficients = Eigen::MatrixXd::Zero(4, 1);
  for (std::size_t k = 0; k < 4; ++k)
    model.coefficients(static_cast<Eigen::Index>(k), 0) = std::log(shares[k] / shares[3]);
  return model;
}

PropensityPrediction predict_propensity(const PropensityModel& model, std::span<const double> x) {
  PropensityPrediction out;
  std::vector<double> regressors;
  std::span<const double> z;
  if (!model.intercept_only) {
    regressors = model.basis.apply(x);
    z = regressors;
  }
  if (model.kind == PropensityKind::Multinomial4) {
    softmax_probabilities(model.coefficients, z, out.p);
  } else {
    double total = 0.0;
    for (Eigen::Index k = 0; k < 4; ++k) {
      double eta = model.coefficients(k, 0);
      for (std::size_t j = 0; j < z.size(); ++j)
        eta += model.coefficients(k, static_cast<Eigen::Index>(j + 1)) * z[j];
      out.p[static_cast<std::size_t>(k)] = 1.0 / (1.0 + std::exp(-eta));
      total += out.p[static_cast<std::size_t>(k)];
    }
    for (double& v : out.p) v /= total;
  }
  const double eps = model.trim_epsilon;
  for (double v : out.p) out.flagged = out.flagged || v < eps || v > 1.0 - eps;
  return out;
}

const LinearModel& NuisanceSet::outcome_model(Cell c) const {
  const auto it = outcome_models.find(c);
  if (it == outcome_models.end()) {
    throw Error(ErrorKind::Configuration,
                "missing nuisance model m" + std::string(cell_label(c)));
  }
  return it->second;
}

const LinearModel& NuisanceSet::level_model(Cell c, int period) const {
  const auto it = eight_model_or.find({c, period});
  if (it == eight_model_or.end()) {
    std::string label(cell_label(c));
    label.insert(label.size() - 1, ",t=" + std::to_string(period));
    throw Error(ErrorKind::Configuration, "missing outcome-regression model " + label);
  }
  return it->second;
}

const PropensityModel& NuisanceSet::propensity_model() const {
  if (!propensity) throw Error(ErrorKind::Configuration, "missing nuisance model p(g,e,x)");
  return *propensity;
}

namespace {

double evaluate(const LinearModel& m, const CovariateBasis& basis, std::span<const double> x) {
  if (m.dim() == 0) return m.coefficients[0];
  return m.predict(basis.apply(x));
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& z, const std::vector<std::size_t>& rows,
                               bool intercept_only) {
  const auto k = intercept_only ? Eigen::Index{1} : z.cols() + 1;
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    design(static_cast<Eigen::Index>(r), 0) = 1.0;
    if (!intercept_only)
      design.row(static_cast<Eigen::Index>(r)).tail(z.cols()) = z.row(static_cast<Eigen::Index>(rows[r]));
  }
  return design;
}

[[noreturn]] void rethrow_annotated(const Error& e, const std::string& where) {
  const std::string msg = "cell " + where + ": " + e.what();
  if (const auto* s = dynamic_cast<const SingularDesignError*>(&e))
    throw SingularDesignError(msg, s->dependent_columns());
  if (const auto* c = dynamic_cast<const ConvergenceError*>(&e))
    throw ConvergenceError(msg, c->loglik_trace());
  throw Error(e.kind(), msg);
}

}  // namespace

double NuisanceSet::outcome(Cell c, std::span<const double> x) const {
  return evaluate(outcome_model(c), basis, x);
}

double NuisanceSet::level(Cell c, int period, std::span<const double> x) const {
  return evaluate(level_model(c, period), basis, x);
}

NuisanceSet fit_nuisances(const PanelDataset& dataset, FitMode mode,
                          const NuisanceOptions& options) {
  NuisanceSet set;
  set.mode = mode;
  set.basis = options.basis;
  set.outcome_intercept_only = options.outcome_spec != ModelSpec::Full;

  const Eigen::MatrixXd z = options.basis.apply(dataset);
  std::array<std::vector<std::size_t>, 4> rows;
  for (std::size_t i = 0; i < dataset.size(); ++i) rows[index(dataset.unit(i).cell())].push_back(i);

  std::vector<std::string> names{"intercept"};
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    names.push_back(j < static_cast<Eigen::Index>(dataset.dim())
                        ? dataset.covariate_names()[static_cast<std::size_t>(j)]
                        : "basis " + std::to_string(j));
  }

  auto fit_cell = [&](Cell c, const std::string& label, auto&& response_of) {
    const std::vector<std::size_t>& idx = rows[index(c)];
    if (options.outcome_spec == ModelSpec::Zero) {
      LinearModel zero;
      zero.coefficients = Eigen::VectorXd::Zero(1);
      zero.fitted_on = label;
      zero.n_obs = idx.size();
      return zero;
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r)
      y[static_cast<Eigen::Index>(r)] = response_of(dataset.unit(idx[r]));
    const bool intercept_only = options.outcome_spec == ModelSpec::InterceptOnly;
    try {
      return fit_ols(with_intercept(z, idx, intercept_only), y, label, names);
    } catch (const Error& e) {
      rethrow_annotated(e, label);
    }
  };

  if (mode == FitMode::ScoreSet) {
    std::vector<Cell> labels(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = dataset.unit(i).cell();
    PropensityModel ps;
    try {
      if (options.propensity_spec == ModelSpec::Full) {
        ps = options.propensity_kind == PropensityKind::Multinomial4
                 ? fit_logistic_multinomial(z, labels, options.logit)
                 : fit_logistic_separate_binary(z, labels, options.logit);
        ps.basis = options.basis;
      } else {
        const CellTable cells = cell_table(dataset);
        ps = constant_propensity(cells.shares);
        ps.kind = options.propensity_kind;
        if (ps.kind == PropensityKind::SeparateBinary) {
          for (std::size_t k = 0; k < 4; ++k)
            ps.coefficients(static_cast<Eigen::Index>(k), 0) =
                std::log(cells.shares[k] / (1.0 - cells.shares[k]));
        }
      }
    } catch (const Error& e) {
      rethrow_annotated(e, "propensity (all cells)");
    }
    ps.trim_epsilon = options.trim_epsilon;
    set.propensity = std::move(ps);
    for (Cell c : kCells) {
      set.outcome_models.emplace(
          c, fit_cell(c, "m" + std::string(cell_label(c)), [](const PanelUnit& u) { return delta_y(u); }));
    }
  } else {
    for (Cell c : kCells) {
      for (int t : {1, 2}) {
        std::string label = "m" + std::string(cell_label(c));
        label.insert(label.size() - 1, ",t=" + std::to_string(t));
        set.eight_model_or.emplace(std::make_pair(c, t),
                                   fit_cell(c, label, [t](const PanelUnit& u) {
                                     return t == 1 ? u.y1 : u.y2;
                                   }));
      }
    }
  }
  return set;
}

}  // namespace tdid
