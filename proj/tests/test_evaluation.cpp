#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "robex/evaluation.hpp"
#include "support/synthetic.hpp"

using namespace robex;
using Catch::Approx;

TEST_CASE("fold sizes for 165 robots and 20 folds", "[evaluation][folds]")
{
   const auto plan = make_folds(165, 20, default_seed);
   std::vector<std::size_t> sizes(20, 0);
   for (const auto f : plan.assignment) ++sizes[f];
   CHECK(std::count(sizes.begin(), sizes.end(), 9) == 5);
   CHECK(std::count(sizes.begin(), sizes.end(), 8) == 15);
}

TEST_CASE("fold plans partition the rows", "[evaluation][folds][property]")
{
   for (const std::size_t n : {2, 7, 20, 59, 165}) {
      for (const std::size_t k : {2, 5, 20}) {
         if (k > n) continue;
         const auto plan = make_folds(n, k, 1000 + n);
         std::multiset<std::size_t> seen;
         for (std::size_t f = 0; f < k; ++f) {
            const auto test = plan.test_rows(f);
            const auto train = plan.train_rows(f);
            CHECK(test.size() + train.size() == n);
            CHECK(test.size() >= n / k);
            CHECK(test.size() <= n / k + 1);
            seen.insert(test.begin(), test.end());
         }
         CHECK(seen.size() == n);
         CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == n);
      }
   }
}

TEST_CASE("n equal to k gives singleton folds", "[evaluation][folds]")
{
   const auto plan = make_folds(6, 6, 1);
   for (std::size_t f = 0; f < 6; ++f) CHECK(plan.test_rows(f).size() == 1);
}

TEST_CASE("fold plans are a function of the seed", "[evaluation][folds]")
{
   CHECK(make_folds(165, 20, 42) == make_folds(165, 20, 42));
   CHECK(make_folds(165, 20, 42).assignment != make_folds(165, 20, 43).assignment);
   CHECK_THROWS_AS(make_folds(5, 6, 1), std::invalid_argument);
   CHECK_THROWS_AS(make_folds(5, 1, 1), std::invalid_argument);
}

TEST_CASE("rejection sampling stays in range", "[evaluation][folds]")
{
   std::mt19937_64 rng(0);
   for (std::uint64_t bound : {0ull, 1ull, 2ull, 7ull, 164ull}) {
      for (int i = 0; i < 1000; ++i) CHECK(detail::uniform_below_or_equal(rng, bound) <= bound);
   }
}

TEST_CASE("cross_validate on all-zero labels gives zero baseline error", "[evaluation]")
{
   auto ds = test::make_small(20);
   for (auto& r : ds.robots) r.labels.fill(0.0);
   const auto plan = make_folds(ds.size(), 5, 1);
   const auto cv = cross_validate(ds, {Modality::HandCrafted}, Construct::Warmth,
                                  HyperParams{1.0, 0.1, {}}, plan);
   REQUIRE(cv.fold_mses.size() == 5);
   for (std::size_t f = 0; f < 5; ++f) {
      CHECK(cv.baseline_fold_mses[f] == 0.0);
      CHECK(cv.fold_mses[f] == Approx(0.0).margin(1e-20));
   }
}

TEST_CASE("SVR beats the mean baseline on a planted signal", "[evaluation]")
{
   test::SyntheticSpec spec;
   spec.robots = 80;
   spec.hc_dim = 5;
   spec.metaphor_dim = 4;
   spec.image_dim = 4;
   spec.signal_noise_sd = 0.1;
   const auto ds = test::make_synthetic(spec);
   const auto plan = make_folds(ds.size(), 10, 3);
   const auto cv = cross_validate(ds, {Modality::HandCrafted}, Construct::Warmth,
                                  HyperParams{10.0, 0.01, {}}, plan);
   CHECK(cv.fold_mses.size() == 10);
   CHECK(mean_of(cv.fold_mses) < 0.6 * mean_of(cv.baseline_fold_mses));
}

TEST_CASE("grid search evaluates every pair", "[evaluation][grid]")
{
   const auto ds = test::make_small(16);
   const auto plan = make_folds(ds.size(), 4, 5);

   SECTION("six by six")
   {
      const auto res = grid_search(ds, default_grid(), plan);
      CHECK(res.points.size() == 36);
      const auto it = std::min_element(res.points.begin(), res.points.end(),
                                       [](const auto& a, const auto& b) {
                                          return a.pooled_mse < b.pooled_mse;
                                       });
      CHECK(res.best_pooled_mse == it->pooled_mse);
      CHECK(res.best.c == it->c);
      CHECK(res.best.epsilon == it->epsilon);
   }
   SECTION("a singleton grid returns its only pair")
   {
      const auto res = grid_search(ds, GridSpec{{1.0}, {0.1}}, plan);
      REQUIRE(res.points.size() == 1);
      CHECK(res.best.c == 1.0);
      CHECK(res.best.epsilon == 0.1);
   }
   SECTION("pooled objective is the mean over combos, constructs and folds")
   {
      const HyperParams hp{1.0, 0.1, {}};
      const auto res = grid_search(ds, GridSpec{{1.0}, {0.1}}, plan);
      double s = 0.0;
      for (const auto combo : all_combos()) {
         for (const auto c : all_constructs) {
            for (const double m : cross_validate(ds, combo, c, hp, plan).fold_mses) s += m;
         }
      }
      CHECK(res.best_pooled_mse == Approx(s / (7.0 * 6.0 * 4.0)).epsilon(1e-12));
   }
   SECTION("empty lists are rejected")
   {
      CHECK_THROWS_AS(grid_search(ds, GridSpec{{}, {0.1}}, plan), std::invalid_argument);
   }
}

TEST_CASE("grid ties go to the smaller C, then the smaller epsilon", "[evaluation][grid]")
{
   // All-zero labels: every pair scores exactly 0.
   auto ds = test::make_small(12);
   for (auto& r : ds.robots) r.labels.fill(0.0);
   const auto plan = make_folds(ds.size(), 3, 1);
   const auto res = grid_search(ds, GridSpec{{10.0, 1.0}, {0.5, 0.1}}, plan);
   CHECK(res.best.c == 1.0);
   CHECK(res.best.epsilon == 0.1);
}

TEST_CASE("run_experiment covers every cell", "[evaluation]")
{
   const auto ds = test::make_small(24);
   const auto plan = make_folds(ds.size(), 6, 9);
   const auto cells = run_experiment(ds, HyperParams{}, plan);
   REQUIRE(cells.size() == 48);

   std::set<std::pair<std::uint8_t, int>> keys;
   for (std::size_t i = 0; i < model_cell_count; ++i) {
      const auto& cell = cells[i];
      REQUIRE(cell.combo);
      keys.insert({cell.combo->bits(), static_cast<int>(index_of(cell.construct))});
      CHECK(cell.fold_mses.size() == 6);
      CHECK(cell.p_value);
      CHECK(cell.mean_mse == Approx(mean_of(cell.fold_mses)));
   }
   CHECK(keys.size() == 42);
   for (std::size_t i = model_cell_count; i < cells.size(); ++i) {
      CHECK(cells[i].is_baseline());
      CHECK_FALSE(cells[i].p_value);
   }

   SECTION("the baseline does not depend on the feature combo")
   {
      for (const auto c : all_constructs) {
         const auto& ref = cells[model_cell_count + index_of(c)].baseline_fold_mses;
         for (std::size_t ci = 0; ci < combo_count; ++ci) {
            CHECK(cells[ci * construct_count + index_of(c)].baseline_fold_mses == ref);
         }
      }
   }
   SECTION("results do not depend on the number of jobs")
   {
      EvalOptions opts;
      opts.jobs = 8;
      const auto parallel = run_experiment(ds, HyperParams{}, plan, opts);
      for (std::size_t i = 0; i < cells.size(); ++i) {
         CHECK(parallel[i].fold_mses == cells[i].fold_mses);
         CHECK(parallel[i].p_value == cells[i].p_value);
      }
   }
}

TEST_CASE("solver failures name the cell", "[evaluation]")
{
   const auto ds = test::make_small(12);
   const auto plan = make_folds(ds.size(), 3, 1);
   EvalOptions opts;
   opts.solver.max_passes = 0;
   CHECK_THROWS_WITH(cross_validate(ds, {Modality::Metaphor}, Construct::Competence,
                                    HyperParams{}, plan, opts),
                     Catch::Matchers::ContainsSubstring("combo M, construct Competence, fold"));
}
