#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "robex/dataset.hpp"
#include "robex/matrix.hpp"

namespace robex
{
   struct HyperParams
   {
      double c = 1.0;
      double epsilon = 0.1;
      // Unset means the scale default, 1 / (cols * var(X)) on the training rows.
      std::optional<double> gamma;

      void check() const
      {
         if (!(c > 0.0) || !std::isfinite(c)) {
            throw std::invalid_argument("HyperParams: C must be a positive finite number");
         }
         if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
            throw std::invalid_argument("HyperParams: epsilon must be non-negative and finite");
         }
         if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma))) {
            throw std::invalid_argument("HyperParams: gamma must be positive and finite");
         }
      }

      friend bool operator==(const HyperParams&, const HyperParams&) = default;
   };

   struct SolverOptions
   {
      // Stop when the maximal KKT violation m(a) - M(a) drops below this.
      double tolerance = 1e-6;
      // One pass is n pair updates for n training rows.
      std::size_t max_passes = 10'000;
   };

   class SolverError : public std::runtime_error
   {
   public:
      SolverError(const std::string& what, double violation)
         : std::runtime_error(what), violation_(violation)
      {}

      double violation() const noexcept { return violation_; }

   private:
      double violation_;
   };

   // Accumulated in index order so every caller sees bitwise identical values.
   inline double squared_distance(std::span<const double> x, std::span<const double> y)
   {
      if (x.size() != y.size()) {
         throw std::invalid_argument("squared_distance: length mismatch (" +
                                     std::to_string(x.size()) + " vs " +
                                     std::to_string(y.size()) + ")");
      }
      double s = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
         const double d = x[k] - y[k];
         s += d * d;
      }
      return s;
   }

   inline double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma)
   {
      if (!(gamma > 0.0)) {
         throw std::invalid_argument("rbf_kernel: gamma must be positive");
      }
      return std::exp(-gamma * squared_distance(x, y));
   }

   // Symmetric matrix of squared row distances.
   inline Matrix pairwise_sqdist(const Matrix& X)
   {
      const std::size_t n = X.rows();
      Matrix d2(n, n);
      for (std::size_t i = 0; i < n; ++i) {
         for (std::size_t j = i + 1; j < n; ++j) {
            const double v = squared_distance(X.row(i), X.row(j));
            d2(i, j) = v;
            d2(j, i) = v;
         }
      }
      return d2;
   }

   inline Matrix rbf_from_sqdist(const Matrix& d2, double gamma)
   {
      Matrix k(d2.rows(), d2.cols());
      for (std::size_t i = 0; i < d2.rows(); ++i) {
         for (std::size_t j = 0; j < d2.cols(); ++j) {
            k(i, j) = std::exp(-gamma * d2(i, j));
         }
      }
      return k;
   }

   inline Matrix rbf_kernel_matrix(const Matrix& X, double gamma)
   {
      return rbf_from_sqdist(pairwise_sqdist(X), gamma);
   }

   // Scale default: 1 / (cols * population variance of every entry).
   inline double resolve_gamma(const Matrix& X)
   {
      if (X.rows() < 2 || X.cols() == 0) {
         throw std::invalid_argument("resolve_gamma: need at least 2 rows and 1 column");
      }
      const auto v = X.values();
      double mean = 0.0;
      for (const double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (const double x : v) {
         const double d = x - mean;
         var += d * d;
      }
      var /= static_cast<double>(v.size());
      if (!(var > 0.0)) {
         throw std::invalid_argument(
            "resolve_gamma: feature matrix has zero variance; pass an explicit gamma");
      }
      return 1.0 / (static_cast<double>(X.cols()) * var);
   }

   inline double resolve_gamma(const Matrix& X, const HyperParams& hp)
   {
      return hp.gamma ? *hp.gamma : resolve_gamma(X);
   }

   // -1/2 b'Kb - eps * sum|b| + y'b
   inline double dual_objective(const Matrix& K, std::span<const double> beta,
                                std::span<const double> y, double epsilon)
   {
      const std::size_t n = beta.size();
      double quad = 0.0;
      double lin = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
         double kb = 0.0;
         for (std::size_t j = 0; j < n; ++j) kb += K(i, j) * beta[j];
         quad += beta[i] * kb;
         lin += y[i] * beta[i] - epsilon * std::abs(beta[i]);
      }
      return -0.5 * quad + lin;
   }

   struct DualSolution
   {
      std::vector<double> beta;
      double bias = 0.0;
      std::size_t iterations = 0;
      double max_violation = 0.0;
   };

   // SMO on the 2n-variable form of the epsilon-SVR dual:
   //
   //   min 1/2 a'Qa + p'a   s.t.  s'a = 0,  0 <= a <= C
   //
   // with a = [alpha; alpha*], s = [+1; -1], p = [eps - y; eps + y] and
   // Q_tu = s_t s_u K. The working pair is the maximal violating pair, ties
   // going to the lowest index.
   inline DualSolution solve_svr_dual(const Matrix& K, std::span<const double> y, double c,
                                      double epsilon, const SolverOptions& opts = {})
   {
      const std::size_t n = y.size();
      if (K.rows() != n || K.cols() != n) {
         throw std::invalid_argument("solve_svr_dual: kernel matrix is not n x n");
      }
      const std::size_t m = 2 * n;
      constexpr double tau = 1e-12;

      std::vector<double> a(m, 0.0);
      std::vector<double> grad(m);
      std::vector<signed char> sign(m);
      for (std::size_t t = 0; t < n; ++t) {
         sign[t] = 1;
         sign[t + n] = -1;
         grad[t] = epsilon - y[t];
         grad[t + n] = epsilon + y[t];
      }
      auto row_of = [n](std::size_t t) { return t < n ? t : t - n; };
      auto q = [&](std::size_t t, std::size_t u) {
         return static_cast<double>(sign[t] * sign[u]) * K(row_of(t), row_of(u));
      };
      auto in_up = [&](std::size_t t) { return sign[t] > 0 ? a[t] < c : a[t] > 0.0; };
      auto in_low = [&](std::size_t t) { return sign[t] > 0 ? a[t] > 0.0 : a[t] < c; };

      const std::size_t max_iter = opts.max_passes * std::max<std::size_t>(n, 1);
      DualSolution sol;
      double violation = 0.0;
      std::size_t iter = 0;
      for (;; ++iter) {
         // i maximizes -s_t G_t over I_up; j minimizes it over I_low.
         double gmax = -std::numeric_limits<double>::infinity();
         double gmin = std::numeric_limits<double>::infinity();
         std::size_t i = m;
         std::size_t j = m;
         for (std::size_t t = 0; t < m; ++t) {
            const double v = -sign[t] * grad[t];
            if (in_up(t) && v > gmax) {
               gmax = v;
               i = t;
            }
            if (in_low(t) && v < gmin) {
               gmin = v;
               j = t;
            }
         }
         violation = (i == m || j == m) ? 0.0 : gmax - gmin;
         if (violation < opts.tolerance) break;
         if (iter >= max_iter) {
            throw SolverError("SMO did not converge within " + std::to_string(opts.max_passes) +
                                 " passes; final KKT violation " + text::format_double(violation),
                              violation);
         }

         const double ai_old = a[i];
         const double aj_old = a[j];
         if (sign[i] != sign[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
               if (a[j] < 0.0) {
                  a[j] = 0.0;
                  a[i] = diff;
               }
            }
            else if (a[i] < 0.0) {
               a[i] = 0.0;
               a[j] = -diff;
            }
            if (diff > 0.0) {
               if (a[i] > c) {
                  a[i] = c;
                  a[j] = c - diff;
               }
            }
            else if (a[j] > c) {
               a[j] = c;
               a[i] = c + diff;
            }
         }
         else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
               if (a[i] > c) {
                  a[i] = c;
                  a[j] = sum - c;
               }
            }
            else if (a[j] < 0.0) {
               a[j] = 0.0;
               a[i] = sum;
            }
            if (sum > c) {
               if (a[j] > c) {
                  a[j] = c;
                  a[i] = sum - c;
               }
            }
            else if (a[i] < 0.0) {
               a[i] = 0.0;
               a[j] = sum;
            }
         }

         const double di = a[i] - ai_old;
         const double dj = a[j] - aj_old;
         for (std::size_t t = 0; t < m; ++t) {
            grad[t] += q(t, i) * di + q(t, j) * dj;
         }
      }

      // Bias from free variables, else the middle of the feasible interval.
      double ub = std::numeric_limits<double>::infinity();
      double lb = -std::numeric_limits<double>::infinity();
      double free_sum = 0.0;
      std::size_t free_count = 0;
      for (std::size_t t = 0; t < m; ++t) {
         const double yg = sign[t] * grad[t];
         const bool at_upper = a[t] >= c;
         const bool at_lower = a[t] <= 0.0;
         if (at_upper) {
            if (sign[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
         }
         else if (at_lower) {
            if (sign[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
         }
         else {
            ++free_count;
            free_sum += yg;
         }
      }
      const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (ub + lb) / 2.0;

      sol.beta.resize(n);
      for (std::size_t t = 0; t < n; ++t) sol.beta[t] = a[t] - a[t + n];
      sol.bias = -rho;
      sol.iterations = iter;
      sol.max_violation = violation;
      return sol;
   }

   inline constexpr double support_threshold = 1e-12;

   struct SvrModel
   {
      Matrix support_vectors;
      std::vector<double> dual_coefs;
      double bias = 0.0;
      double gamma = 1.0;
      HyperParams hp;
      std::size_t train_dim = 0;

      std::size_t support_count() const noexcept { return dual_coefs.size(); }
   };

   namespace detail
   {
      inline SvrModel make_model(const Matrix& X, const DualSolution& sol, double gamma,
                                 const HyperParams& hp)
      {
         SvrModel model;
         model.gamma = gamma;
         model.hp = hp;
         model.bias = sol.bias;
         model.train_dim = X.cols();
         std::vector<std::size_t> keep;
         for (std::size_t i = 0; i < sol.beta.size(); ++i) {
            if (std::abs(sol.beta[i]) > support_threshold) {
               keep.push_back(i);
               model.dual_coefs.push_back(sol.beta[i]);
            }
         }
         model.support_vectors = keep.empty() ? Matrix(0, X.cols()) : X.select_rows(keep);
         return model;
      }

      inline void check_training_input(const Matrix& X, std::span<const double> y,
                                       const HyperParams& hp)
      {
         hp.check();
         if (X.rows() < 2) {
            throw std::invalid_argument("fit_svr: need at least 2 training rows");
         }
         if (y.size() != X.rows()) {
            throw std::invalid_argument("fit_svr: target length does not match row count");
         }
      }
   }

   // Fit from a precomputed squared-distance matrix of the training rows.
   // Kernel values match fit_svr bitwise when sqdist came from pairwise_sqdist.
   inline SvrModel fit_svr_sqdist(const Matrix& X, const Matrix& sqdist, std::span<const double> y,
                                  const HyperParams& hp, double gamma,
                                  const SolverOptions& opts = {})
   {
      detail::check_training_input(X, y, hp);
      const auto sol = solve_svr_dual(rbf_from_sqdist(sqdist, gamma), y, hp.c, hp.epsilon, opts);
      return detail::make_model(X, sol, gamma, hp);
   }

   inline SvrModel fit_svr(const Matrix& X, std::span<const double> y, const HyperParams& hp,
                           const SolverOptions& opts = {})
   {
      detail::check_training_input(X, y, hp);
      const double gamma = resolve_gamma(X, hp);
      return fit_svr_sqdist(X, pairwise_sqdist(X), y, hp, gamma, opts);
   }

   inline double predict_one(const SvrModel& m, std::span<const double> x)
   {
      if (x.size() != m.train_dim) {
         throw std::invalid_argument("predict: row width " + std::to_string(x.size()) +
                                     " does not match training width " +
                                     std::to_string(m.train_dim));
      }
      double f = 0.0;
      for (std::size_t j = 0; j < m.dual_coefs.size(); ++j) {
         f += m.dual_coefs[j] * std::exp(-m.gamma * squared_distance(m.support_vectors.row(j), x));
      }
      return f + m.bias;
   }

   inline std::vector<double> predict(const SvrModel& m, const Matrix& X)
   {
      if (X.cols() != m.train_dim) {
         throw std::invalid_argument("predict: row width " + std::to_string(X.cols()) +
                                     " does not match training width " +
                                     std::to_string(m.train_dim));
      }
      std::vector<double> out(X.rows());
      for (std::size_t i = 0; i < X.rows(); ++i) out[i] = predict_one(m, X.row(i));
      return out;
   }

   inline double mean_of(std::span<const double> v)
   {
      if (v.empty()) {
         throw std::invalid_argument("mean of an empty vector");
      }
      double s = 0.0;
      for (const double x : v) s += x;
      return s / static_cast<double>(v.size());
   }

   // Training-fold mean per construct.
   struct MeanBaseline
   {
      LabelSet means{};

      double predict(Construct c) const noexcept { return means[index_of(c)]; }
   };

   inline MeanBaseline fit_baseline(const std::array<std::vector<double>, construct_count>& y_by_construct)
   {
      MeanBaseline b;
      for (const auto c : all_constructs) {
         const auto& y = y_by_construct[index_of(c)];
         if (y.empty()) {
            throw std::invalid_argument("fit_baseline: empty label vector for " +
                                        std::string(display_name(c)));
         }
         b.means[index_of(c)] = mean_of(y);
      }
      return b;
   }
}
