#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/math/distributions/students_t.hpp>

namespace robex
{
   inline double mse(std::span<const double> pred, std::span<const double> truth)
   {
      if (pred.size() != truth.size()) {
         throw std::invalid_argument("mse: length mismatch (" + std::to_string(pred.size()) +
                                     " vs " + std::to_string(truth.size()) + ")");
      }
      if (pred.empty()) {
         throw std::invalid_argument("mse: empty vectors");
      }
      double s = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
         const double d = pred[i] - truth[i];
         s += d * d;
      }
      return s / static_cast<double>(pred.size());
   }

   struct TTestResult
   {
      double t = 0.0;
      double p_value = 1.0;
   };

   // Two-sided paired t-test on d = a - b with n - 1 degrees of freedom.
   inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b)
   {
      if (a.size() != b.size()) {
         throw std::invalid_argument("paired_t_test: length mismatch");
      }
      const std::size_t n = a.size();
      if (n < 2) {
         throw std::invalid_argument("paired_t_test: need at least 2 pairs");
      }
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
         const double d = (a[i] - b[i]) - mean;
         ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));

      if (sd == 0.0) {
         if (mean == 0.0) return {0.0, 1.0};
         return {std::copysign(std::numeric_limits<double>::infinity(), mean), 0.0};
      }
      const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
      const boost::math::students_t dist(static_cast<double>(n - 1));
      const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
      return {t, std::min(p, 1.0)};
   }

   // Significance annotation; thresholds are strict.
   inline std::string_view stars(double p)
   {
      if (!(p >= 0.0 && p <= 1.0)) {
         throw std::invalid_argument("stars: p-value outside [0, 1]");
      }
      if (p < 0.001) return "***";
      if (p < 0.01) return "**";
      if (p < 0.05) return "*";
      return "";
   }
}
