#include "specshare/balance_chain.hpp"

#include "specshare/errors.hpp"

namespace specshare {

BalanceChain::BalanceChain(const DynamicParams& params, const UtilityModel& model, const JointTraffic2& traffic)
    : params_(params), model_(model), traffic_(traffic) {
  if (params.n != 2) throw ContractViolation("balance chain is the two-operator case");
  params.validate();
  const int s = size();
  kernel_ = Eigen::MatrixXd::Zero(s, s);
  rewards_ = Eigen::MatrixXd::Zero(s, 2);
  for (int b = -k(); b <= k(); ++b) {
    for (int l1 = 0; l1 < 2; ++l1) {
      for (int l2 = 0; l2 < 2; ++l2) {
        const double p = traffic_.p[l1][l2];
        if (p == 0.0) continue;
        const auto o = outcome(b, l1, l2);
        kernel_(index(b), index(o.next)) += p;
        rewards_(index(b), 0) += p * model_.pi(o.widths[0], l1);
        rewards_(index(b), 1) += p * model_.pi(o.widths[1], l2);
      }
    }
  }
}

BalanceChain::Outcome BalanceChain::outcome(int b, int r1, int r2) const {
  const BalanceLedger ledger(std::vector<int>{b, -b});
  const int reports[2] = {r1, r2};
  const auto trades = trading_policy_q(reports, ledger, params_);
  const auto widths = dynamic_widths(params_, trades);
  int next = b;
  for (const auto& t : trades) next += t.borrower == 0 ? -1 : 1;
  return {{widths[0], widths[1]}, next};
}

ValueTable value_function(const BalanceChain& chain, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("discount factor must lie in [0, 1)");
  const int s = chain.size();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(s, s) - delta * chain.kernel();
  const Eigen::MatrixXd rhs = (1.0 - delta) * chain.rewards();
  ValueTable table;
  table.k = chain.k();
  table.values = a.partialPivLu().solve(rhs);
  table.residual = (a * table.values - rhs).norm() / std::max(rhs.norm(), 1e-300);
  return table;
}

Eigen::VectorXd stationary_distribution(const BalanceChain& chain) {
  const int s = chain.size();
  if (chain.traffic().p01() == 0.0 && chain.traffic().p10() == 0.0) {
    // No trade ever happens; the ledger stays where it starts.
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(s);
    mu(chain.index(0)) = 1.0;
    return mu;
  }
  // mu^T (P - I) = 0 with one equation replaced by sum(mu) = 1.
  Eigen::MatrixXd a = chain.kernel().transpose() - Eigen::MatrixXd::Identity(s, s);
  a.row(s - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s);
  rhs(s - 1) = 1.0;
  return a.fullPivLu().solve(rhs);
}

double stationary_sum_revenue(const BalanceChain& chain) {
  const Eigen::VectorXd mu = stationary_distribution(chain);
  return mu.dot(chain.rewards().rowwise().sum());
}

}  // namespace specshare
