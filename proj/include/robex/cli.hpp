#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "robex/dataset.hpp"
#include "robex/evaluation.hpp"
#include "robex/reporting.hpp"
#include "robex/text_io.hpp"

// Subcommand bodies behind the `robex` executable. Each returns the process
// exit status: 0 success, 1 validation failure, 2 runtime or solver failure.
namespace robex::cli
{
   enum ExitCode : int { ok = 0, invalid_data = 1, runtime_failure = 2 };

   struct RunConfig
   {
      std::filesystem::path data_dir;
      std::uint64_t seed = default_seed;
      std::size_t k = default_folds;
      HyperParams hp{}; // C = 1, epsilon = 0.1, scale-default gamma
      std::optional<GridSpec> grid;
      std::filesystem::path output; // empty: standard output
      ReportFormat format = ReportFormat::Markdown;
      std::size_t jobs = 1;
      std::optional<bool> expect_reference_shape;
   };

   inline std::vector<double> parse_list(std::string_view csv)
   {
      std::vector<double> out;
      for (const auto f : text::split(csv)) {
         const auto v = text::parse_double(f);
         if (!v) throw std::invalid_argument("not a number: '" + std::string(f) + "'");
         out.push_back(*v);
      }
      return out;
   }

   inline std::optional<double> parse_gamma(std::string_view s)
   {
      if (s == "scale") return std::nullopt;
      const auto v = text::parse_double(s);
      if (!v || !(*v > 0.0)) throw std::invalid_argument("gamma must be 'scale' or a positive number");
      return v;
   }

   inline ReportFormat parse_format(std::string_view s)
   {
      if (s == "markdown" || s == "md") return ReportFormat::Markdown;
      if (s == "csv") return ReportFormat::Csv;
      throw std::invalid_argument("format must be 'markdown' or 'csv'");
   }

   namespace detail
   {
      inline void print_dataset_error(const DatasetError& e, std::ostream& err)
      {
         if (e.violations().empty()) {
            err << e.what() << '\n';
            return;
         }
         for (const auto& v : e.violations()) err << v.to_string() << '\n';
      }

      // Loads or reports; nullopt means the caller should exit with invalid_data.
      inline std::optional<Dataset> load_or_report(const std::filesystem::path& dir,
                                                   std::optional<bool> expect_reference_shape,
                                                   std::ostream& err)
      {
         try {
            return load_dataset(dir, LoadOptions{expect_reference_shape});
         }
         catch (const DatasetError& e) {
            print_dataset_error(e, err);
            return std::nullopt;
         }
      }
   }

   inline int cmd_validate(const std::filesystem::path& data_dir,
                           std::optional<bool> expect_reference_shape, std::ostream& out,
                           std::ostream& err)
   {
      (void)out;
      try {
         return detail::load_or_report(data_dir, expect_reference_shape, err) ? ok : invalid_data;
      }
      catch (const std::exception& e) {
         err << "error: " << e.what() << '\n';
         return runtime_failure;
      }
   }

   inline int cmd_gridsearch(const RunConfig& cfg, std::ostream& out, std::ostream& err)
   {
      try {
         const auto ds = detail::load_or_report(cfg.data_dir, cfg.expect_reference_shape, err);
         if (!ds) return invalid_data;
         const auto plan = make_folds(ds->size(), cfg.k, cfg.seed);
         const auto grid = cfg.grid.value_or(default_grid());
         EvalOptions opts;
         opts.jobs = cfg.jobs;
         const auto res = grid_search(*ds, grid, plan, cfg.hp, opts);
         out << "evaluated " << res.points.size() << " pairs over " << combo_count << " combos x "
             << construct_count << " constructs x " << plan.k << " folds\n";
         out << "C=" << text::format_double(res.best.c)
             << " epsilon=" << text::format_double(res.best.epsilon)
             << " pooled_mse=" << text::format_double(res.best_pooled_mse) << '\n';
         return ok;
      }
      catch (const std::exception& e) {
         err << "error: " << e.what() << '\n';
         return runtime_failure;
      }
   }

   inline int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err)
   {
      try {
         const auto ds = detail::load_or_report(cfg.data_dir, cfg.expect_reference_shape, err);
         if (!ds) return invalid_data;
         const auto plan = make_folds(ds->size(), cfg.k, cfg.seed);
         EvalOptions opts;
         opts.jobs = cfg.jobs;
         const auto results = run_experiment(*ds, cfg.hp, plan, opts);
         const Provenance prov{cfg.seed, cfg.hp, cfg.k, dataset_fingerprint(cfg.data_dir)};
         const auto doc = report_document(results, cfg.format, prov);
         if (cfg.output.empty()) {
            out << doc;
         }
         else {
            text::write_file_atomic(cfg.output, doc);
         }
         return ok;
      }
      catch (const std::exception& e) {
         err << "error: " << e.what() << '\n';
         return runtime_failure;
      }
   }

   // Checks embedding files produced by the offline extractor: schema header,
   // constant width, finite values, unique ids, and the same id set in both
   // files. When hc.csv and labels.csv are present the whole directory is
   // loaded as well.
   inline int cmd_extract_check(const std::filesystem::path& data_dir, std::ostream& out,
                                std::ostream& err)
   {
      try {
         std::optional<std::unordered_set<std::string>> ids;
         for (const auto m : {Modality::Metaphor, Modality::Image}) {
            const auto table = robex::detail::read_numeric_csv(data_dir / file_name(m));
            robex::detail::check_block_header(table, m);
            std::unordered_set<std::string> these;
            for (const auto& r : table.rows) these.insert(r.id);
            if (ids && *ids != these) {
               err << file_name(m) << ": id set differs from " << file_name(Modality::Metaphor)
                   << '\n';
               return invalid_data;
            }
            ids = std::move(these);
            out << file_name(m) << ": " << table.rows.size() << " rows, dimension "
                << table.header.size() - 1 << '\n';
         }
         if (std::filesystem::exists(data_dir / file_name(Modality::HandCrafted)) &&
             std::filesystem::exists(data_dir / labels_file)) {
            if (!detail::load_or_report(data_dir, std::nullopt, err)) return invalid_data;
            out << "dataset: ok\n";
         }
         return ok;
      }
      catch (const DatasetError& e) {
         detail::print_dataset_error(e, err);
         return invalid_data;
      }
      catch (const std::exception& e) {
         err << "error: " << e.what() << '\n';
         return runtime_failure;
      }
   }
}
