#include "blaze/apps/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "blaze/error.hpp"
#include "blaze/mapreduce.hpp"

namespace blaze::apps {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(const Point& x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

void check_model(const GmmModel& m) {
  const std::size_t k = m.alpha.size();
  if (k == 0) throw UsageError("mixture needs at least one component");
  if (m.mu.size() != k || m.sigma.size() != k) throw UsageError("mixture parameter counts differ");
  const auto dim = m.mu.front().size();
  for (std::size_t c = 0; c < k; ++c) {
    if (m.mu[c].size() != dim || m.sigma[c].rows() != dim || m.sigma[c].cols() != dim) {
      throw UsageError("mixture component " + std::to_string(c) + " has inconsistent dimensions");
    }
  }
}

}  // namespace

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

GmmDensity::GmmDensity(GmmModel& model) {
  check_model(model);
  const auto dim = static_cast<double>(model.mu.front().size());
  for (std::size_t c = 0; c < model.components(); ++c) {
    auto& sigma = model.sigma[c];
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      sigma.diagonal().array() += kCovarianceJitter;
      llt.compute(sigma);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("covariance of mixture component " + std::to_string(c) +
                             " is not positive definite after regularization");
      }
    }
    Eigen::MatrixXd l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    comps_.push_back({std::move(l), model.mu[c], -0.5 * (dim * std::log(2.0 * std::numbers::pi) + log_det),
                      std::log(model.alpha[c])});
  }
}

void GmmDensity::log_densities(const Point& x, std::vector<double>& out) const {
  out.resize(comps_.size());
  const auto xv = as_vector(x);
  for (std::size_t c = 0; c < comps_.size(); ++c) {
    const auto& comp = comps_[c];
    const Eigen::VectorXd z = comp.chol.triangularView<Eigen::Lower>().solve(xv - comp.mu);
    out[c] = comp.log_norm - 0.5 * z.squaredNorm();
  }
}

double GmmDensity::log_mixture(const Point& x) const {
  std::vector<double> v;
  log_densities(x, v);
  for (std::size_t c = 0; c < v.size(); ++c) v[c] += comps_[c].log_alpha;
  return log_sum_exp(v);
}

GmmModel gmm_em(const DistVector<Point>& points, GmmModel model, const GmmOptions& options) {
  check_model(model);
  Context& ctx = points.context();
  const std::size_t k = model.components();
  const auto dim = model.mu.front().size();
  const std::size_t n = points.size();
  if (n == 0) throw UsageError("mixture fit needs at least one point");
  model.n = n;
  auto density = std::make_unique<GmmDensity>(model);

  const auto zeros = [&] { return std::vector<std::vector<double>>(points.local_size(), std::vector<double>(k, 0.0)); };
  DistVector<std::vector<double>> log_p(ctx, zeros());
  DistVector<std::vector<double>> w(ctx, zeros());
  const std::size_t base = points.offset();
  const auto check_dim = [dim](std::size_t i, const Point& x) {
    if (x.size() != static_cast<std::size_t>(dim)) {
      throw InputError("point " + std::to_string(i) + " has dimension " + std::to_string(x.size()) + ", expected " +
                       std::to_string(dim));
    }
  };

  while (model.iterations < options.max_iters) {
    for (auto& v : log_p.local()) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : w.local()) std::fill(v.begin(), v.end(), 0.0);

    // (1) log p_k(x_i)
    mapreduce(
        points,
        [&](std::size_t i, const Point& x, const auto& emit) {
          check_dim(i, x);
          std::vector<double> lp;
          density->log_densities(x, lp);
          emit(i, std::move(lp));
        },
        "sum", log_p);

    // (2) w_ik = alpha_k p_k(x_i) / sum_m alpha_m p_m(x_i)
    mapreduce(
        log_p,
        [&](std::size_t i, const std::vector<double>& lp, const auto& emit) {
          std::vector<double> v(k);
          for (std::size_t c = 0; c < k; ++c) v[c] = std::log(model.alpha[c]) + lp[c];
          const double norm = log_sum_exp(v);
          for (auto& x : v) x = std::exp(x - norm);
          emit(i, std::move(v));
        },
        "sum", w);

    // (3) N_k
    std::vector<double> nk(k, 0.0);
    mapreduce(
        w,
        [&](std::size_t, const std::vector<double>& wi, const auto& emit) {
          for (std::size_t c = 0; c < k; ++c) emit(c, wi[c]);
        },
        "sum", nk);
    for (std::size_t c = 0; c < k; ++c) {
      if (!(nk[c] > 0)) throw NumericalError("mixture component " + std::to_string(c) + " has no membership weight");
    }

    // (4) sum_i w_ik x_i
    std::vector<std::vector<double>> mu_sum(k);
    mapreduce(
        points,
        [&](std::size_t i, const Point& x, const auto& emit) {
          const auto& wi = w.local()[i - base];
          for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> s(x);
            for (auto& v : s) v *= wi[c];
            emit(c, std::move(s));
          }
        },
        "sum", mu_sum);
    for (std::size_t c = 0; c < k; ++c) {
      model.alpha[c] = nk[c] / static_cast<double>(n);
      model.mu[c] = Eigen::Map<const Eigen::VectorXd>(mu_sum[c].data(), dim) / nk[c];
    }

    // (5) sum_i w_ik (x_i - mu_k)(x_i - mu_k)^T, row-major
    std::vector<std::vector<double>> sigma_sum(k);
    mapreduce(
        points,
        [&](std::size_t i, const Point& x, const auto& emit) {
          const auto& wi = w.local()[i - base];
          std::vector<double> diff(dim);
          for (std::size_t c = 0; c < k; ++c) {
            for (Eigen::Index j = 0; j < dim; ++j) diff[j] = x[j] - model.mu[c][j];
            std::vector<double> s(dim * dim);
            for (Eigen::Index a = 0; a < dim; ++a) {
              for (Eigen::Index b = 0; b < dim; ++b) s[a * dim + b] = wi[c] * diff[a] * diff[b];
            }
            emit(c, std::move(s));
          }
        },
        "sum", sigma_sum);
    for (std::size_t c = 0; c < k; ++c) {
      auto& sig = model.sigma[c];
      for (Eigen::Index a = 0; a < dim; ++a) {
        for (Eigen::Index b = 0; b < dim; ++b) sig(a, b) = sigma_sum[c][a * dim + b] / nk[c];
      }
    }
    density = std::make_unique<GmmDensity>(model);

    // (6) log-likelihood of the updated model
    std::vector<double> ll(1, 0.0);
    mapreduce(
        points, [&](std::size_t, const Point& x, const auto& emit) { emit(0, density->log_mixture(x)); }, "sum", ll);

    const double prev = model.ll_history.empty() ? -std::numeric_limits<double>::infinity() : model.ll_history.back();
    model.log_likelihood = ll[0];
    model.ll_history.push_back(ll[0]);
    ++model.iterations;
    if (options.observer) options.observer(model, w);
    if (ll[0] - prev < options.tol) break;
  }
  return model;
}

std::string to_text(const GmmModel& model) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"iterations\": " << model.iterations << ", \"log_likelihood\": " << model.log_likelihood
      << ", \"components\": [";
  for (std::size_t c = 0; c < model.components(); ++c) {
    out << (c ? ", " : "") << "{\"alpha\": " << model.alpha[c] << ", \"mu\": [";
    for (Eigen::Index j = 0; j < model.mu[c].size(); ++j) out << (j ? ", " : "") << model.mu[c][j];
    out << "], \"sigma\": [";
    for (Eigen::Index a = 0; a < model.sigma[c].rows(); ++a) {
      out << (a ? ", " : "") << "[";
      for (Eigen::Index b = 0; b < model.sigma[c].cols(); ++b) out << (b ? ", " : "") << model.sigma[c](a, b);
      out << "]";
    }
    out << "]}";
  }
  out << "]}\n";
  return out.str();
}

}  // namespace blaze::apps
