#pragma once

// Reference solver for the epsilon-SVR dual on tiny instances. It shares no
// code with the SMO path: kernel, projection and bias are computed here from
// scratch so the two can check each other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace robex::testing
{
   using Rows = std::vector<std::vector<double>>;

   struct OracleResult
   {
      double objective = 0.0;
      std::vector<double> beta;
      double bias = 0.0;
      std::size_t iterations = 0;
   };

   inline std::vector<std::vector<double>> oracle_kernel(const Rows& X, double gamma)
   {
      const std::size_t n = X.size();
      std::vector<std::vector<double>> K(n, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
         for (std::size_t j = 0; j < n; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < X[i].size(); ++k) {
               d += (X[i][k] - X[j][k]) * (X[i][k] - X[j][k]);
            }
            K[i][j] = std::exp(-gamma * d);
         }
      }
      return K;
   }

   inline double oracle_objective(const std::vector<std::vector<double>>& K,
                                  const std::vector<double>& beta, const std::vector<double>& y,
                                  double eps)
   {
      double v = 0.0;
      for (std::size_t i = 0; i < beta.size(); ++i) {
         for (std::size_t j = 0; j < beta.size(); ++j) v -= 0.5 * beta[i] * K[i][j] * beta[j];
         v += y[i] * beta[i] - eps * std::abs(beta[i]);
      }
      return v;
   }

   // Euclidean projection of (u, v) onto {0 <= u, v <= C, sum u = sum v}.
   // The multiplier solves a monotone piecewise-linear equation, located
   // exactly among its breakpoints.
   inline void project(std::vector<double>& u, std::vector<double>& v, double c)
   {
      auto clip = [c](double x) { return std::clamp(x, 0.0, c); };
      auto h = [&](double lam) {
         double s = 0.0;
         for (std::size_t i = 0; i < u.size(); ++i) s += clip(u[i] - lam) - clip(v[i] + lam);
         return s;
      };
      std::vector<double> bp;
      for (std::size_t i = 0; i < u.size(); ++i) {
         bp.push_back(u[i]);
         bp.push_back(u[i] - c);
         bp.push_back(-v[i]);
         bp.push_back(c - v[i]);
      }
      std::sort(bp.begin(), bp.end());
      // h is non-increasing, >= 0 left of every breakpoint and <= 0 right of them.
      double lam = bp.front();
      if (h(bp.front()) <= 0.0) {
         lam = bp.front();
      }
      else {
         for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
            const double h0 = h(bp[k]);
            const double h1 = h(bp[k + 1]);
            if (h0 >= 0.0 && h1 <= 0.0) {
               lam = (h0 == h1) ? bp[k] : bp[k] + (bp[k + 1] - bp[k]) * h0 / (h0 - h1);
               break;
            }
            lam = bp[k + 1];
         }
      }
      for (std::size_t i = 0; i < u.size(); ++i) {
         u[i] = clip(u[i] - lam);
         v[i] = clip(v[i] + lam);
      }
   }

   // Bias from KKT conditions of the recovered beta: average over free
   // coefficients, else the midpoint of the feasible interval.
   inline double oracle_bias(const std::vector<std::vector<double>>& K,
                             const std::vector<double>& beta, const std::vector<double>& y,
                             double c, double eps)
   {
      const double tol = 1e-9 * std::max(1.0, c);
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      double free_sum = 0.0;
      std::size_t free_count = 0;
      for (std::size_t i = 0; i < beta.size(); ++i) {
         double f = 0.0;
         for (std::size_t j = 0; j < beta.size(); ++j) f += K[i][j] * beta[j];
         const double b = beta[i];
         if (b > tol && b < c - tol) {
            free_sum += y[i] - eps - f;
            ++free_count;
         }
         else if (b < -tol && b > -c + tol) {
            free_sum += y[i] + eps - f;
            ++free_count;
         }
         else if (b >= c - tol) {
            hi = std::min(hi, y[i] - eps - f);
         }
         else if (b <= -c + tol) {
            lo = std::max(lo, y[i] + eps - f);
         }
         else {
            lo = std::max(lo, y[i] - eps - f);
            hi = std::min(hi, y[i] + eps - f);
         }
      }
      if (free_count > 0) return free_sum / static_cast<double>(free_count);
      return (lo + hi) / 2.0;
   }

   // Accelerated projected-gradient ascent with adaptive restart, run until the
   // objective moves by less than 1e-10 and the iterate is stationary.
   inline OracleResult dual_oracle(const Rows& X, const std::vector<double>& y, double c,
                                   double eps, double gamma)
   {
      const std::size_t n = X.size();
      if (n == 0 || n > 16) {
         throw std::invalid_argument("dual_oracle: intended for 1..16 rows");
      }
      const auto K = oracle_kernel(X, gamma);
      double lip = 0.0;
      for (const auto& row : K) {
         double s = 0.0;
         for (const double k : row) s += std::abs(k);
         lip = std::max(lip, 2.0 * s);
      }
      const double step = 1.0 / lip;

      std::vector<double> u(n, 0.0), v(n, 0.0), pu(n, 0.0), pv(n, 0.0), zu(n), zv(n);
      auto beta_of = [n](const std::vector<double>& a, const std::vector<double>& b) {
         std::vector<double> out(n);
         for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
         return out;
      };
      double obj = oracle_objective(K, beta_of(u, v), y, eps);
      double t = 1.0;
      std::size_t iter = 0;
      constexpr std::size_t max_iter = 5'000'000;
      std::size_t quiet = 0;
      for (; iter < max_iter; ++iter) {
         // Momentum point.
         const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
         const double w = (t - 1.0) / t_next;
         for (std::size_t i = 0; i < n; ++i) {
            zu[i] = u[i] + w * (u[i] - pu[i]);
            zv[i] = v[i] + w * (v[i] - pv[i]);
         }
         const auto bz = beta_of(zu, zv);
         std::vector<double> nu(n), nv(n);
         for (std::size_t i = 0; i < n; ++i) {
            double kb = 0.0;
            for (std::size_t j = 0; j < n; ++j) kb += K[i][j] * bz[j];
            nu[i] = zu[i] + step * (-kb - eps + y[i]);
            nv[i] = zv[i] + step * (kb - eps - y[i]);
         }
         project(nu, nv, c);
         const double new_obj = oracle_objective(K, beta_of(nu, nv), y, eps);
         if (new_obj < obj && t > 1.0) {
            // Restart momentum; the plain projected step from (u, v) is monotone.
            t = 1.0;
            pu = u;
            pv = v;
            continue;
         }
         double move = 0.0;
         for (std::size_t i = 0; i < n; ++i) {
            move = std::max({move, std::abs(nu[i] - u[i]), std::abs(nv[i] - v[i])});
         }
         const double change = new_obj - obj;
         pu = u;
         pv = v;
         u = nu;
         v = nv;
         obj = new_obj;
         t = t_next;
         quiet = (change < 1e-10 && move < 1e-10) ? quiet + 1 : 0;
         if (quiet >= 10) break;
      }

      OracleResult res;
      res.beta = beta_of(u, v);
      res.objective = obj;
      res.bias = oracle_bias(K, res.beta, y, c, eps);
      res.iterations = iter;
      return res;
   }

   inline double oracle_predict(const Rows& X, const OracleResult& r, double gamma,
                                const std::vector<double>& x)
   {
      double f = r.bias;
      for (std::size_t j = 0; j < X.size(); ++j) {
         double d = 0.0;
         for (std::size_t k = 0; k < x.size(); ++k) d += (X[j][k] - x[k]) * (X[j][k] - x[k]);
         f += r.beta[j] * std::exp(-gamma * d);
      }
      return f;
   }
}
