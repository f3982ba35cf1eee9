#pragma once

#include "specshare/dynamic_sharing.hpp"
#include "specshare/traffic.hpp"
#include "specshare/utility_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace specshare {

/// Two-operator balance process under truthful play. The state is operator
/// 1's balance in trade units, b in [-k, k]; operator 2 holds -b.
class BalanceChain {
 public:
  /// Throws ContractViolation unless params.n == 2.
  BalanceChain(const DynamicParams& params, const UtilityModel& model, const JointTraffic2& traffic);

  struct Outcome {
    std::array<double, 2> widths;
    int next;  // operator 1's balance after the slot
  };

  const DynamicParams& params() const noexcept { return params_; }
  const UtilityModel& model() const noexcept { return model_; }
  const JointTraffic2& traffic() const noexcept { return traffic_; }

  int k() const noexcept { return params_.k; }
  int size() const noexcept { return 2 * params_.k + 1; }
  int index(int b) const noexcept { return b + params_.k; }

  /// Widths and next balance when the operators report (r1, r2) at balance b.
  Outcome outcome(int b, int r1, int r2) const;

  /// Truthful transition kernel, size() x size().
  const Eigen::MatrixXd& kernel() const noexcept { return kernel_; }
  /// Expected one-slot utility per state (rows) and operator (columns).
  const Eigen::MatrixXd& rewards() const noexcept { return rewards_; }

 private:
  DynamicParams params_;
  UtilityModel model_;
  JointTraffic2 traffic_;
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXd rewards_;
};

/// Normalized discounted revenue (1-delta) sum delta^t u_t from each balance
/// under conformance, per operator.
struct ValueTable {
  int k = 0;
  Eigen::MatrixXd values;  // rows b = -k..k, columns operators
  double residual = 0.0;   // relative residual of the linear solve

  double at(int op, int b) const { return values(b + k, op); }
};

/// Solves V = (1-delta) R + delta P V directly. Throws DomainError unless
/// 0 <= delta < 1.
ValueTable value_function(const BalanceChain& chain, double delta);

/// Long-run occupancy of the balance states under truthful play.
Eigen::VectorXd stationary_distribution(const BalanceChain& chain);

/// Long-run expected sum of both operators' one-slot utilities.
double stationary_sum_revenue(const BalanceChain& chain);

}  // namespace specshare
