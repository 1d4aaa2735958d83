#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blaze/apps/data.hpp"
#include "blaze/dist_vector.hpp"

namespace blaze::apps {

// Added to a covariance diagonal when its Cholesky factorization fails.
inline constexpr double kCovarianceJitter = 1e-6;

struct GmmModel {
  std::vector<double> alpha;
  std::vector<Eigen::VectorXd> mu;
  std::vector<Eigen::MatrixXd> sigma;
  std::size_t n = 0;
  // Log-likelihood of the points under this model.
  double log_likelihood = 0;
  int iterations = 0;
  std::vector<double> ll_history;

  std::size_t components() const noexcept { return alpha.size(); }
};

// Log-density evaluator for every component of a model.
class GmmDensity {
 public:
  // Factors each covariance; a failed factorization is retried once with
  // kCovarianceJitter added to the diagonal (the model is updated to match).
  // Throws NumericalError naming the component if that fails too.
  explicit GmmDensity(GmmModel& model);

  // log p_k(x | mu_k, sigma_k) for k = 0..K-1.
  void log_densities(const Point& x, std::vector<double>& out) const;
  // log sum_k alpha_k p_k(x).
  double log_mixture(const Point& x) const;

 private:
  struct Component {
    Eigen::MatrixXd chol;  // lower factor
    Eigen::VectorXd mu;
    double log_norm;
    double log_alpha;
  };
  std::vector<Component> comps_;
};

double log_sum_exp(const std::vector<double>& v);

struct GmmOptions {
  double tol = 1e-6;
  int max_iters = 500;
  // Called on every worker after each iteration with the updated model and
  // the memberships w_ik computed from the previous one.
  std::function<void(const GmmModel&, const DistVector<std::vector<double>>&)> observer;
};

// EM for a Gaussian mixture, six MapReduce jobs per iteration: component
// log-densities, memberships, N_k, mean sums, covariance sums, and the
// log-likelihood of the updated model. Stops once the log-likelihood improves
// by less than tol. Collective; every worker returns the same model.
GmmModel gmm_em(const DistVector<Point>& points, GmmModel initial, const GmmOptions& options = {});

std::string to_text(const GmmModel& model);

}  // namespace blaze::apps
