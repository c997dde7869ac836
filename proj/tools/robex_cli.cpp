#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "robex/cli.hpp"

int main(int argc, char** argv)
{
   using namespace robex;

   CLI::App app{"Predict robot expectation ratings from embodiment features with epsilon-SVR"};
   app.require_subcommand(1);

   cli::RunConfig cfg;
   std::string gamma = "scale";
   std::string format = "markdown";
   std::string grid_c;
   std::string grid_eps;
   bool expect_reference = false;

   auto add_data = [&](CLI::App* sub) {
      sub->add_option("--data", cfg.data_dir, "Dataset directory")->required();
      sub->add_flag("--expect-reference-shape", expect_reference,
                    "Require 165 robots and 59 hand-crafted features");
   };
   auto add_protocol = [&](CLI::App* sub) {
      sub->add_option("--seed", cfg.seed, "Fold shuffle seed")->capture_default_str();
      sub->add_option("--k", cfg.k, "Number of cross-validation folds")->capture_default_str();
      sub->add_option("--gamma", gamma, "RBF width or 'scale'")->capture_default_str();
      sub->add_option("--jobs", cfg.jobs, "Parallel cells")->capture_default_str();
   };

   auto* validate = app.add_subcommand("validate", "Load and validate a dataset directory");
   add_data(validate);

   auto* extract_check =
      app.add_subcommand("extract-check", "Check embedding files written by the extractor");
   extract_check->add_option("--data", cfg.data_dir, "Directory with metaphor.csv and image.csv")
      ->required();

   auto* gridsearch = app.add_subcommand("gridsearch", "Select C and epsilon by pooled CV MSE");
   add_data(gridsearch);
   add_protocol(gridsearch);
   gridsearch->add_option("--grid-c", grid_c, "Comma-separated C values");
   gridsearch->add_option("--grid-eps", grid_eps, "Comma-separated epsilon values");

   auto* run = app.add_subcommand("run", "Cross-validate every combo and construct, write report");
   add_data(run);
   add_protocol(run);
   run->add_option("--c", cfg.hp.c, "Regularization C")->capture_default_str();
   run->add_option("--epsilon", cfg.hp.epsilon, "Tube width epsilon")->capture_default_str();
   run->add_option("--output", cfg.output, "Report path (default: standard output)");
   run->add_option("--format", format, "markdown or csv")->capture_default_str();

   try {
      app.parse(argc, argv);
   }
   catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? cli::ok : cli::runtime_failure;
   }

   try {
      if (expect_reference) cfg.expect_reference_shape = true;
      cfg.hp.gamma = cli::parse_gamma(gamma);
      cfg.format = cli::parse_format(format);
      if (!grid_c.empty() || !grid_eps.empty()) {
         const auto defaults = default_grid();
         cfg.grid = GridSpec{grid_c.empty() ? defaults.c_values : cli::parse_list(grid_c),
                             grid_eps.empty() ? defaults.epsilon_values : cli::parse_list(grid_eps)};
      }
   }
   catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return cli::runtime_failure;
   }

   if (*validate) return cli::cmd_validate(cfg.data_dir, cfg.expect_reference_shape, std::cout, std::cerr);
   if (*extract_check) return cli::cmd_extract_check(cfg.data_dir, std::cout, std::cerr);
   if (*gridsearch) return cli::cmd_gridsearch(cfg, std::cout, std::cerr);
   return cli::cmd_run(cfg, std::cout, std::cerr);
}
