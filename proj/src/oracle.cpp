#include "fairalloc/oracle.hpp"

#include "fairalloc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fairalloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Identical rounds share one row with a multiplicity; every method below is
// symmetric in identical items, so nothing is lost.
struct Market {
  std::size_t n = 0;
  Matrix values;                  // groups x n
  std::vector<double> count;      // multiplicity per group
  std::vector<std::size_t> group_of;  // round -> group
  std::vector<double> budgets;
};

Market group_rounds(const Instance& instance) {
  const std::size_t horizon = instance.horizon();
  const std::size_t n = instance.agents();
  std::vector<std::size_t> order(horizon);
  std::iota(order.begin(), order.end(), 0);
  auto row_less = [&](std::size_t a, std::size_t b) {
    const auto ra = instance.round_values(a), rb = instance.round_values(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::stable_sort(order.begin(), order.end(), row_less);

  Market market;
  market.n = n;
  market.group_of.assign(horizon, 0);
  market.budgets.assign(instance.weights().begin(), instance.weights().end());
  std::vector<std::size_t> representative;
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t t = order[k];
    if (k == 0 || row_less(order[k - 1], t)) {
      representative.push_back(t);
      market.count.push_back(0.0);
    }
    market.count.back() += 1.0;
    market.group_of[t] = representative.size() - 1;
  }
  market.values = Matrix(representative.size(), n);
  for (std::size_t g = 0; g < representative.size(); ++g) {
    const auto row = instance.round_values(representative[g]);
    std::copy(row.begin(), row.end(), market.values.row(g).begin());
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t g = 0; g < market.values.rows() && !any; ++g) any = market.values(g, i) > 0.0;
    if (!any) throw Error(ErrorCode::DegenerateAgent, "agent " + std::to_string(i) + " values nothing");
  }
  return market;
}

std::vector<double> group_utilities(const Market& m, const Matrix& x) {
  std::vector<double> u(m.n, 0.0);
  for (std::size_t g = 0; g < x.rows(); ++g)
    for (std::size_t i = 0; i < m.n; ++i) u[i] += m.count[g] * x(g, i) * m.values(g, i);
  return u;
}

// One proportional-response update; returns the max relative change over bids
// whose allocation share exceeds the support threshold.
double response_step(const Market& m, Matrix& x, std::vector<double>& prices) {
  const auto u = group_utilities(m, x);
  double change = 0.0;
  for (std::size_t g = 0; g < x.rows(); ++g) {
    double price = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) price += m.budgets[i] * x(g, i) * m.values(g, i) / u[i];
    for (std::size_t i = 0; i < m.n; ++i) {
      const double bid = m.budgets[i] * x(g, i) * m.values(g, i) / u[i];
      const double next = bid / price;
      if (x(g, i) > kSupportThreshold && prices[g] > 0.0) {
        const double old_bid = x(g, i) * prices[g];
        change = std::max(change, std::abs(bid - old_bid) / old_bid);
      }
      x(g, i) = next;
    }
    prices[g] = price;
  }
  return change;
}

// Initial bids: each agent spreads its budget evenly over the rounds it values.
Matrix initial_shares(const Market& m, std::vector<double>& prices) {
  std::vector<double> valued(m.n, 0.0);
  for (std::size_t g = 0; g < m.values.rows(); ++g)
    for (std::size_t i = 0; i < m.n; ++i)
      if (m.values(g, i) > 0.0) valued[i] += m.count[g];
  Matrix bids(m.values.rows(), m.n);
  prices.assign(m.values.rows(), 0.0);
  for (std::size_t g = 0; g < m.values.rows(); ++g) {
    for (std::size_t i = 0; i < m.n; ++i)
      if (m.values(g, i) > 0.0) bids(g, i) = m.budgets[i] / valued[i];
    for (std::size_t i = 0; i < m.n; ++i) prices[g] += bids(g, i);
    for (std::size_t i = 0; i < m.n; ++i) bids(g, i) /= prices[g];
  }
  return bids;
}

struct DualPoint {
  double objective = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  Matrix shares;
  std::vector<double> prices;
};

// Smoothed dual in gamma = log(beta):
//   F(gamma) = sum_g count_g * ||(exp(gamma_i) v_gi)_i||_{1/mu} - sum_i B_i gamma_i.
// Its gradient is the budget residual of the softmax shares at the smoothed prices.
class SmoothedDual {
public:
  explicit SmoothedDual(const Market& market) : m_(market), log_values_(market.values.rows(), market.n) {
    for (std::size_t g = 0; g < m_.values.rows(); ++g)
      for (std::size_t i = 0; i < m_.n; ++i)
        log_values_(g, i) = m_.values(g, i) > 0.0 ? std::log(m_.values(g, i)) : -kInf;
  }

  DualPoint evaluate(const Eigen::VectorXd& gamma, double mu, bool with_hessian) const {
    const std::size_t n = m_.n;
    DualPoint point;
    point.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (with_hessian) point.hessian = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
    point.shares = Matrix(m_.values.rows(), n);
    point.prices.assign(m_.values.rows(), 0.0);
    std::vector<double> z(n), w(n);
    for (std::size_t g = 0; g < m_.values.rows(); ++g) {
      double top = -kInf;
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = gamma[Eigen::Index(i)] + log_values_(g, i);
        top = std::max(top, z[i]);
      }
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += w[i] = std::exp((z[i] - top) / mu);
      for (auto& wi : w) wi /= total;
      const double price = std::exp(top + mu * std::log(total));
      const double mass = m_.count[g] * price;
      point.objective += mass;
      point.prices[g] = price;
      for (std::size_t i = 0; i < n; ++i) {
        point.shares(g, i) = w[i];
        point.gradient[Eigen::Index(i)] += mass * w[i];
      }
      if (with_hessian)
        for (std::size_t i = 0; i < n; ++i) {
          if (w[i] == 0.0) continue;
          point.hessian(Eigen::Index(i), Eigen::Index(i)) += mass * w[i] / mu;
          for (std::size_t j = 0; j < n; ++j)
            point.hessian(Eigen::Index(i), Eigen::Index(j)) -= mass * (1.0 / mu - 1.0) * w[i] * w[j];
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
      point.objective -= m_.budgets[i] * gamma[Eigen::Index(i)];
      point.gradient[Eigen::Index(i)] -= m_.budgets[i];
    }
    return point;
  }

  double scaled_gradient(const DualPoint& p) const {
    double r = 0.0;
    for (std::size_t i = 0; i < m_.n; ++i)
      r = std::max(r, std::abs(p.gradient[Eigen::Index(i)]) / m_.budgets[i]);
    return r;
  }

private:
  const Market& m_;
  Matrix log_values_;
};

constexpr int kWarmStartSteps = 20;
constexpr int kNewtonStepsPerStage = 60;
constexpr double kStageGradientTol = 1e-13;
constexpr std::size_t kResidualCheckEvery = 100;

struct GroupSolution {
  Matrix shares;
  std::vector<double> prices;
  std::size_t iterations = 0;
};

double group_kkt_residual(const Market& m, const GroupSolution& s) {
  double residual = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    double best = 0.0;
    for (std::size_t g = 0; g < s.prices.size(); ++g)
      best = std::max(best, m.values(g, i) / s.prices[g]);
    for (std::size_t g = 0; g < s.prices.size(); ++g)
      if (s.shares(g, i) > kSupportThreshold)
        residual = std::max(residual, 1.0 - (m.values(g, i) / s.prices[g]) / best);
  }
  return residual;
}

GroupSolution proportional_response(const Market& m, const OracleOptions& options,
                                    GroupSolution start) {
  while (start.iterations < options.max_iters) {
    const double change = response_step(m, start.shares, start.prices);
    ++start.iterations;
    if (change < options.tol) break;
  }
  return start;
}

GroupSolution smoothed_newton(const Market& m, const OracleOptions& options) {
  GroupSolution s;
  s.shares = initial_shares(m, s.prices);
  for (int k = 0; k < kWarmStartSteps; ++k) response_step(m, s.shares, s.prices);
  s.iterations = kWarmStartSteps;

  const std::size_t n = m.n;
  const auto u = group_utilities(m, s.shares);
  Eigen::VectorXd gamma(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) gamma[Eigen::Index(i)] = std::log(m.budgets[i] / u[i]);

  const SmoothedDual dual(m);
  const double mu_end = options.tol / 10.0;
  double mu = 1.0;
  DualPoint point;
  for (;;) {
    point = dual.evaluate(gamma, mu, true);
    for (int step = 0; step < kNewtonStepsPerStage; ++step) {
      const double residual = dual.scaled_gradient(point);
      if (residual < kStageGradientTol) break;
      const double ridge = 1e-14 * point.hessian.trace();
      const Eigen::MatrixXd system =
          point.hessian + ridge * Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
      const Eigen::VectorXd direction = system.ldlt().solve(-point.gradient);
      const double slope = point.gradient.dot(direction);
      bool accepted = false;
      for (double t = 1.0; t > 1e-10; t *= 0.5) {
        auto trial = dual.evaluate(gamma + t * direction, mu, true);
        // At small mu the objective moves below rounding; fall back to the gradient.
        const bool armijo = trial.objective <= point.objective + 1e-4 * t * slope;
        const bool flat = trial.objective <= point.objective + 1e-15 * std::abs(point.objective) &&
                          dual.scaled_gradient(trial) < residual;
        if (armijo || flat) {
          gamma += t * direction;
          point = std::move(trial);
          accepted = true;
          break;
        }
      }
      ++s.iterations;
      if (!accepted) break;
    }
    if (mu <= mu_end) break;
    mu = std::max(mu * 0.1, mu_end);
  }
  s.shares = std::move(point.shares);
  s.prices = std::move(point.prices);

  // Heavily tied markets can stall the smoothed solve; continue with plain
  // proportional response from the current point.
  if (group_kkt_residual(m, s) > 10.0 * options.tol ||
      dual.scaled_gradient(point) > 10.0 * options.tol)
    while (s.iterations < options.max_iters) {
      for (std::size_t k = 0; k < kResidualCheckEvery && s.iterations < options.max_iters; ++k) {
        response_step(m, s.shares, s.prices);
        ++s.iterations;
      }
      if (group_kkt_residual(m, s) <= options.tol) break;
    }
  return s;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw Error(ErrorCode::InvalidEpsilon, "epsilon must lie in (0, 1], got " +
                                               std::to_string(epsilon));
}

}  // namespace

std::string_view to_string(OracleMethod method) {
  switch (method) {
    case OracleMethod::proportional_response: return "proportional_response";
    case OracleMethod::smoothed_newton: return "smoothed_newton";
  }
  return "unknown";
}

void certify(const Instance& instance, EquilibriumResult& result) {
  const std::size_t n = instance.agents();
  const std::size_t horizon = instance.horizon();
  result.utilities = realized_utilities(instance.values(), Allocation::fractional(result.fractions));
  double residual = 0.0, budget = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0.0, spend = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
      best = std::max(best, instance.value(t, i) / result.prices[t]);
      spend += result.prices[t] * result.fractions(t, i);
    }
    for (std::size_t t = 0; t < horizon; ++t)
      if (result.fractions(t, i) > kSupportThreshold)
        residual = std::max(residual, 1.0 - (instance.value(t, i) / result.prices[t]) / best);
    const double b = instance.weights()[i];
    budget = std::max(budget, std::abs(spend - b) / b);
  }
  result.kkt_residual = residual;
  result.budget_error = budget;
}

EquilibriumResult divisible_nw_optimum(const Instance& instance, const OracleOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidParameters, "tol must be positive");
  const Market market = group_rounds(instance);
  GroupSolution solution;
  if (options.method == OracleMethod::proportional_response) {
    solution.shares = initial_shares(market, solution.prices);
    solution = proportional_response(market, options, std::move(solution));
  } else {
    solution = smoothed_newton(market, options);
  }

  EquilibriumResult result;
  result.fractions = Matrix(instance.horizon(), instance.agents());
  result.prices.assign(instance.horizon(), 0.0);
  for (std::size_t t = 0; t < instance.horizon(); ++t) {
    const std::size_t g = market.group_of[t];
    std::copy(solution.shares.row(g).begin(), solution.shares.row(g).end(),
              result.fractions.row(t).begin());
    result.prices[t] = solution.prices[g];
  }
  result.iterations = solution.iterations;
  certify(instance, result);
  if (result.kkt_residual > 10.0 * options.tol || result.budget_error > 10.0 * options.tol)
    throw Error(ErrorCode::NoConvergence,
                std::string(to_string(options.method)) + ": KKT residual " +
                    std::to_string(result.kkt_residual) + " after " +
                    std::to_string(result.iterations) + " iterations");
  return result;
}

IntegralOptimum integral_nw_optimum(const Instance& instance) {
  const std::size_t n = instance.agents();
  const std::size_t horizon = instance.horizon();
  if (std::pow(static_cast<double>(n), static_cast<double>(horizon)) > kEnumerationCap)
    throw Error(ErrorCode::InstanceTooLarge,
                std::to_string(n) + "^" + std::to_string(horizon) + " allocations");
  const auto weights = instance.weights();
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);

  // prefix[k] holds utilities from rounds 0..k-1, so a change at digit k only
  // recomputes the suffix.
  std::vector<std::size_t> digits(horizon, 0);
  std::vector<std::vector<double>> prefix(horizon + 1, std::vector<double>(n, 0.0));
  auto rebuild = [&](std::size_t from) {
    for (std::size_t t = from; t < horizon; ++t) {
      prefix[t + 1] = prefix[t];
      prefix[t + 1][digits[t]] += instance.value(t, digits[t]);
    }
  };
  auto log_nw = [&](const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (u[i] <= 0.0) return -kInf;
      s += weights[i] / total_weight * std::log(u[i]);
    }
    return s;
  };

  rebuild(0);
  std::vector<std::size_t> best_digits = digits;
  double best = log_nw(prefix[horizon]);
  for (;;) {
    std::size_t k = horizon;
    while (k > 0 && digits[k - 1] + 1 == n) digits[--k] = 0;
    if (k == 0) break;
    ++digits[k - 1];
    rebuild(k - 1);
    const double value = log_nw(prefix[horizon]);
    if (value > best) {
      best = value;
      best_digits = digits;
    }
  }

  IntegralOptimum optimum;
  optimum.allocation = Allocation::integral(n, best_digits);
  optimum.utilities = realized_utilities(instance.values(), optimum.allocation);
  optimum.nash_welfare = best == -kInf ? 0.0 : std::exp(best);
  return optimum;
}

double r_delta(const Instance& instance, std::span<const double> algorithm_utilities,
               double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::NonpositiveDelta, "delta must be positive");
  const std::size_t n = instance.agents();
  if (algorithm_utilities.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "utilities do not match the instance");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += delta / (algorithm_utilities[i] + delta);
  for (std::size_t t = 0; t < instance.horizon(); ++t) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      best = std::max(best, instance.value(t, i) / (algorithm_utilities[i] + delta));
    total += best;
  }
  return total / static_cast<double>(n);
}

double canonical_envy_bound(double epsilon) {
  check_epsilon(epsilon);
  return 1.0 + 2.0 * std::log(1.0 / epsilon);
}

double canonical_items_bound(double epsilon) {
  check_epsilon(epsilon);
  return (1.0 + std::log(1.0 / epsilon)) / epsilon;
}

double envy_bound_finite_T(double epsilon, double horizon) {
  check_epsilon(epsilon);
  if (!(horizon >= 1.0)) throw Error(ErrorCode::InvalidParameters, "T must be at least 1");
  const double e2 = epsilon * epsilon;
  const double e4 = e2 * e2;
  return canonical_envy_bound(epsilon) + (1.0 + e4) * (1.0 + e2) / (e4 * e2 * horizon) +
         (1.0 + e2) * (1.0 + e2) / (e4 * e4 * horizon * horizon);
}

}  // namespace fairalloc
