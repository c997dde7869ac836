#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "robex/dataset.hpp"
#include "robex/features.hpp"
#include "robex/parallel.hpp"
#include "robex/stats.hpp"
#include "robex/svr.hpp"

namespace robex
{
   inline constexpr std::uint64_t default_seed = 42;
   inline constexpr std::size_t default_folds = 20;

   struct FoldPlan
   {
      std::size_t k = 0;
      std::uint64_t seed = 0;
      std::vector<std::size_t> assignment; // fold index per row

      std::size_t size() const noexcept { return assignment.size(); }

      std::vector<std::size_t> test_rows(std::size_t fold) const
      {
         std::vector<std::size_t> out;
         for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] == fold) out.push_back(i);
         }
         return out;
      }

      std::vector<std::size_t> train_rows(std::size_t fold) const
      {
         std::vector<std::size_t> out;
         for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] != fold) out.push_back(i);
         }
         return out;
      }

      friend bool operator==(const FoldPlan&, const FoldPlan&) = default;
   };

   namespace detail
   {
      // Uniform integer in [0, bound] from mt19937_64 by rejection; unlike
      // std::uniform_int_distribution this is identical on every platform.
      inline std::uint64_t uniform_below_or_equal(std::mt19937_64& rng, std::uint64_t bound)
      {
         if (bound == std::numeric_limits<std::uint64_t>::max()) return rng();
         const std::uint64_t range = bound + 1;
         const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                     std::numeric_limits<std::uint64_t>::max() % range;
         for (;;) {
            const std::uint64_t r = rng();
            if (r < limit) return r % range;
         }
      }
   }

   // Fisher-Yates shuffle of 0..n-1 driven by mt19937_64(seed), then dealt
   // round-robin into k folds.
   inline FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed)
   {
      if (k < 2) {
         throw std::invalid_argument("make_folds: need at least 2 folds");
      }
      if (k > n) {
         throw std::invalid_argument("make_folds: " + std::to_string(k) + " folds exceed " +
                                     std::to_string(n) + " rows");
      }
      std::vector<std::size_t> perm(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      std::mt19937_64 rng(seed);
      for (std::size_t i = n - 1; i > 0; --i) {
         const auto j = static_cast<std::size_t>(detail::uniform_below_or_equal(rng, i));
         std::swap(perm[i], perm[j]);
      }
      FoldPlan plan{k, seed, std::vector<std::size_t>(n)};
      for (std::size_t pos = 0; pos < n; ++pos) plan.assignment[perm[pos]] = pos % k;
      return plan;
   }

   struct GridSpec
   {
      std::vector<double> c_values;
      std::vector<double> epsilon_values;

      std::size_t pair_count() const noexcept { return c_values.size() * epsilon_values.size(); }
   };

   // Six values per hyperparameter, shared by C and epsilon.
   inline GridSpec default_grid()
   {
      const std::vector<double> v{0.001, 0.01, 0.1, 1.0, 10.0, 100.0};
      return {v, v};
   }

   class EvaluationError : public std::runtime_error
   {
   public:
      using std::runtime_error::runtime_error;
   };

   struct EvalOptions
   {
      std::size_t jobs = 1;
      SolverOptions solver;
      FuseOptions fuse;
   };

   struct CrossValidation
   {
      std::vector<double> fold_mses;
      std::vector<double> baseline_fold_mses;
   };

   // A fused feature matrix with everything about it that does not depend on
   // labels or hyperparameters: fold row sets, per-fold training distances and
   // the per-fold scale-default gamma.
   class PreparedCombo
   {
   public:
      PreparedCombo(const Dataset& ds, ModalityCombo combo, const FoldPlan& plan,
                    const FuseOptions& fuse_opts = {})
         : combo_(combo), features_(fuse(ds, combo, fuse_opts)), plan_(&plan)
      {
         if (plan.size() != ds.size()) {
            throw std::invalid_argument("fold plan built for " + std::to_string(plan.size()) +
                                        " rows, dataset has " + std::to_string(ds.size()));
         }
         const Matrix sqdist = pairwise_sqdist(features_.values);
         folds_.resize(plan.k);
         for (std::size_t f = 0; f < plan.k; ++f) {
            auto& fd = folds_[f];
            fd.train = plan.train_rows(f);
            fd.test = plan.test_rows(f);
            fd.scale_gamma = scale_gamma_or_nan(features_.values.select_rows(fd.train));
            fd.sqdist_train = Matrix(fd.train.size(), fd.train.size());
            for (std::size_t a = 0; a < fd.train.size(); ++a) {
               for (std::size_t b = 0; b < fd.train.size(); ++b) {
                  fd.sqdist_train(a, b) = sqdist(fd.train[a], fd.train[b]);
               }
            }
         }
      }

      ModalityCombo combo() const noexcept { return combo_; }
      const FeatureMatrix& features() const noexcept { return features_; }
      const FoldPlan& plan() const noexcept { return *plan_; }

      // Fold-local labels and MSEs for both models; both see the same split.
      std::pair<double, double> evaluate_fold(std::size_t f, std::span<const double> y,
                                              const HyperParams& hp,
                                              const SolverOptions& solver) const
      {
         const auto& fd = folds_.at(f);
         std::vector<double> y_train(fd.train.size());
         std::vector<double> y_test(fd.test.size());
         for (std::size_t a = 0; a < fd.train.size(); ++a) y_train[a] = y[fd.train[a]];
         for (std::size_t a = 0; a < fd.test.size(); ++a) y_test[a] = y[fd.test[a]];

         const Matrix x_train = features_.values.select_rows(fd.train);
         double gamma = 0.0;
         if (hp.gamma) {
            gamma = *hp.gamma;
         }
         else if (std::isnan(fd.scale_gamma)) {
            gamma = resolve_gamma(x_train); // throws the zero-variance error
         }
         else {
            gamma = fd.scale_gamma;
         }
         const auto model = fit_svr_sqdist(x_train, fd.sqdist_train, y_train, hp, gamma, solver);
         const double svr_mse = mse(predict(model, features_.values.select_rows(fd.test)), y_test);

         const double mean = mean_of(y_train);
         const std::vector<double> constant(y_test.size(), mean);
         return {svr_mse, mse(constant, y_test)};
      }

   private:
      struct FoldData
      {
         std::vector<std::size_t> train;
         std::vector<std::size_t> test;
         Matrix sqdist_train;
         double scale_gamma = 0.0; // NaN when the fold's training rows have no variance
      };

      static double scale_gamma_or_nan(const Matrix& x)
      {
         try {
            return resolve_gamma(x);
         }
         catch (const std::invalid_argument&) {
            return std::numeric_limits<double>::quiet_NaN();
         }
      }

      ModalityCombo combo_;
      FeatureMatrix features_;
      const FoldPlan* plan_;
      std::vector<FoldData> folds_;
   };

   namespace detail
   {
      inline std::string cell_context(ModalityCombo combo, Construct c, std::size_t fold)
      {
         return "combo " + combo.label() + ", construct " + std::string(display_name(c)) +
                ", fold " + std::to_string(fold);
      }

      inline CrossValidation cross_validate(const PreparedCombo& pc, Construct c,
                                            std::span<const double> y, const HyperParams& hp,
                                            const SolverOptions& solver)
      {
         CrossValidation cv;
         const std::size_t k = pc.plan().k;
         cv.fold_mses.resize(k);
         cv.baseline_fold_mses.resize(k);
         for (std::size_t f = 0; f < k; ++f) {
            try {
               std::tie(cv.fold_mses[f], cv.baseline_fold_mses[f]) =
                  pc.evaluate_fold(f, y, hp, solver);
            }
            catch (const std::exception& e) {
               throw EvaluationError(cell_context(pc.combo(), c, f) + ": " + e.what());
            }
         }
         return cv;
      }
   }

   inline CrossValidation cross_validate(const Dataset& ds, ModalityCombo combo, Construct c,
                                         const HyperParams& hp, const FoldPlan& plan,
                                         const EvalOptions& opts = {})
   {
      hp.check();
      const PreparedCombo pc(ds, combo, plan, opts.fuse);
      const auto y = label_vector(ds, c);
      return detail::cross_validate(pc, c, y, hp, opts.solver);
   }

   struct GridPoint
   {
      double c = 0.0;
      double epsilon = 0.0;
      double pooled_mse = 0.0;
   };

   struct GridResult
   {
      HyperParams best;
      double best_pooled_mse = 0.0;
      std::vector<GridPoint> points; // c-major, in grid order
   };

   // Pooled objective: mean fold MSE over every combo, construct and fold of a
   // single shared plan. Ties go to the smaller C, then the smaller epsilon.
   inline GridResult grid_search(const Dataset& ds, const GridSpec& grid, const FoldPlan& plan,
                                 const HyperParams& base = {}, const EvalOptions& opts = {})
   {
      if (grid.c_values.empty() || grid.epsilon_values.empty()) {
         throw std::invalid_argument("grid_search: both hyperparameter lists must be non-empty");
      }
      std::vector<HyperParams> pairs;
      for (const double c : grid.c_values) {
         for (const double e : grid.epsilon_values) {
            HyperParams hp = base;
            hp.c = c;
            hp.epsilon = e;
            hp.check();
            pairs.push_back(hp);
         }
      }

      const auto combos = all_combos();
      std::vector<std::unique_ptr<PreparedCombo>> prepared(combos.size());
      parallel_for(combos.size(), opts.jobs, [&](std::size_t i) {
         prepared[i] = std::make_unique<PreparedCombo>(ds, combos[i], plan, opts.fuse);
      });
      std::array<std::vector<double>, construct_count> labels;
      for (const auto c : all_constructs) labels[index_of(c)] = label_vector(ds, c);

      // One task per (pair, combo, construct); fold sums land in fixed slots.
      const std::size_t per_pair = combos.size() * construct_count;
      std::vector<double> sums(pairs.size() * per_pair, 0.0);
      parallel_for(sums.size(), opts.jobs, [&](std::size_t task) {
         const std::size_t p = task / per_pair;
         const std::size_t ci = (task % per_pair) / construct_count;
         const auto c = all_constructs[task % construct_count];
         const auto cv = detail::cross_validate(*prepared[ci], c, labels[index_of(c)], pairs[p],
                                                opts.solver);
         double s = 0.0;
         for (const double v : cv.fold_mses) s += v;
         sums[task] = s;
      });

      GridResult res;
      const double denom = static_cast<double>(per_pair * plan.k);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
         double s = 0.0;
         for (std::size_t t = 0; t < per_pair; ++t) s += sums[p * per_pair + t];
         res.points.push_back({pairs[p].c, pairs[p].epsilon, s / denom});
      }
      std::size_t best = 0;
      for (std::size_t p = 1; p < res.points.size(); ++p) {
         const auto& a = res.points[p];
         const auto& b = res.points[best];
         if (a.pooled_mse < b.pooled_mse ||
             (a.pooled_mse == b.pooled_mse &&
              (a.c < b.c || (a.c == b.c && a.epsilon < b.epsilon)))) {
            best = p;
         }
      }
      res.best = pairs[best];
      res.best_pooled_mse = res.points[best].pooled_mse;
      return res;
   }

   struct CellResult
   {
      std::optional<ModalityCombo> combo; // empty for the baseline row
      Construct construct{};
      std::vector<double> fold_mses;
      double mean_mse = 0.0;
      std::vector<double> baseline_fold_mses;
      std::optional<double> p_value; // empty for the baseline row

      bool is_baseline() const noexcept { return !combo.has_value(); }
   };

   inline constexpr std::size_t model_cell_count = combo_count * construct_count;

   // All 42 (combo, construct) cells in report order, then the 6 baseline cells.
   inline std::vector<CellResult> run_experiment(const Dataset& ds, const HyperParams& hp,
                                                 const FoldPlan& plan, const EvalOptions& opts = {})
   {
      hp.check();
      const auto combos = all_combos();
      std::vector<std::unique_ptr<PreparedCombo>> prepared(combos.size());
      parallel_for(combos.size(), opts.jobs, [&](std::size_t i) {
         prepared[i] = std::make_unique<PreparedCombo>(ds, combos[i], plan, opts.fuse);
      });
      std::array<std::vector<double>, construct_count> labels;
      for (const auto c : all_constructs) labels[index_of(c)] = label_vector(ds, c);

      std::vector<CellResult> cells(model_cell_count + construct_count);
      parallel_for(model_cell_count, opts.jobs, [&](std::size_t task) {
         const std::size_t ci = task / construct_count;
         const auto c = all_constructs[task % construct_count];
         auto cv = detail::cross_validate(*prepared[ci], c, labels[index_of(c)], hp, opts.solver);
         auto& cell = cells[task];
         cell.combo = combos[ci];
         cell.construct = c;
         cell.mean_mse = mean_of(cv.fold_mses);
         cell.p_value = paired_t_test(cv.fold_mses, cv.baseline_fold_mses).p_value;
         cell.fold_mses = std::move(cv.fold_mses);
         cell.baseline_fold_mses = std::move(cv.baseline_fold_mses);
      });

      // The baseline ignores features; every combo carries the same fold MSEs,
      // so the baseline row copies them from the first combo.
      for (const auto c : all_constructs) {
         auto& b = cells[model_cell_count + index_of(c)];
         b.construct = c;
         b.baseline_fold_mses = cells[index_of(c)].baseline_fold_mses;
         b.fold_mses = b.baseline_fold_mses;
         b.mean_mse = mean_of(b.fold_mses);
      }
      return cells;
   }
}
