#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "robex/cli.hpp"
#include "support/tempdir.hpp"

using namespace robex;
using robex::test::fixture;
using robex::test::TempDir;

namespace
{
   void copy_fixture(const std::string& name, const std::filesystem::path& to)
   {
      std::filesystem::copy(fixture(name), to, std::filesystem::copy_options::recursive);
   }

   cli::RunConfig small_config(const std::filesystem::path& dir)
   {
      cli::RunConfig cfg;
      cfg.data_dir = dir;
      cfg.k = 4;
      return cfg;
   }
}

TEST_CASE("validate exit codes", "[cli]")
{
   std::ostringstream out;
   std::ostringstream err;
   CHECK(cli::cmd_validate(fixture("small"), std::nullopt, out, err) == cli::ok);
   CHECK(err.str().empty());

   TempDir tmp;
   const auto dir = tmp.path() / "data";
   copy_fixture("small", dir);

   SECTION("label outside [-3, 3]")
   {
      auto s = text::read_file(dir / "labels.csv");
      const auto pos = s.find("robot_000,") + 10;
      s.replace(pos, s.find(',', pos) - pos, "3.2");
      text::write_file_atomic(dir / "labels.csv", s);
      CHECK(cli::cmd_validate(dir, std::nullopt, out, err) == cli::invalid_data);
      CHECK_THAT(err.str(), Catch::Matchers::ContainsSubstring("robot_000"));
   }
   SECTION("missing image.csv")
   {
      std::filesystem::remove(dir / "image.csv");
      CHECK(cli::cmd_validate(dir, std::nullopt, out, err) == cli::invalid_data);
      CHECK_THAT(err.str(), Catch::Matchers::ContainsSubstring("image.csv"));
   }
   SECTION("reference shape requested on a small dataset")
   {
      CHECK(cli::cmd_validate(dir, true, out, err) == cli::invalid_data);
   }
}

TEST_CASE("gridsearch with a singleton grid", "[cli]")
{
   auto cfg = small_config(fixture("small"));
   cfg.grid = GridSpec{{1.0}, {0.1}};
   std::ostringstream out;
   std::ostringstream err;
   REQUIRE(cli::cmd_gridsearch(cfg, out, err) == cli::ok);
   CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring(
                            "evaluated 1 pairs over 7 combos x 6 constructs x 4 folds"));
   CHECK_THAT(out.str(), Catch::Matchers::ContainsSubstring("C=1 epsilon=0.1 pooled_mse="));
}

TEST_CASE("run writes byte-identical reports", "[cli]")
{
   TempDir tmp;
   auto cfg = small_config(fixture("small"));
   std::ostringstream out;
   std::ostringstream err;

   cfg.output = tmp.path() / "a.md";
   REQUIRE(cli::cmd_run(cfg, out, err) == cli::ok);
   cfg.output = tmp.path() / "b.md";
   cfg.jobs = 4;
   REQUIRE(cli::cmd_run(cfg, out, err) == cli::ok);
   const auto a = text::read_file(tmp.path() / "a.md");
   CHECK(a == text::read_file(tmp.path() / "b.md"));
   CHECK_THAT(a, Catch::Matchers::StartsWith("| Features Used |"));
   CHECK_THAT(a, Catch::Matchers::ContainsSubstring("seed=42"));
   CHECK_FALSE(std::filesystem::exists(tmp.path() / "a.md.tmp"));

   SECTION("csv format")
   {
      cfg.format = ReportFormat::Csv;
      cfg.output.clear();
      std::ostringstream csv;
      REQUIRE(cli::cmd_run(cfg, csv, err) == cli::ok);
      CHECK_THAT(csv.str(), Catch::Matchers::StartsWith("combo,construct,mean_mse,p_value"));
      CHECK_THAT(csv.str(), Catch::Matchers::ContainsSubstring("\n# robex 0.1.0"));
   }
}

TEST_CASE("run exits 2 when folds outnumber robots", "[cli]")
{
   auto cfg = small_config(fixture("small"));
   cfg.k = 100; // more folds than robots
   std::ostringstream out;
   std::ostringstream err;
   CHECK(cli::cmd_run(cfg, out, err) == cli::runtime_failure);
   CHECK_THAT(err.str(), Catch::Matchers::ContainsSubstring("folds exceed"));
}

TEST_CASE("extract-check on extractor output", "[cli][extractor]")
{
   std::ostringstream out;
   std::ostringstream err;
   REQUIRE(cli::cmd_extract_check(fixture("extractor_3"), out, err) == cli::ok);
   CHECK(out.str() ==
         "metaphor.csv: 3 rows, dimension 5\nimage.csv: 3 rows, dimension 5\ndataset: ok\n");

   TempDir tmp;
   const auto dir = tmp.path() / "emb";
   copy_fixture("extractor_3", dir);

   SECTION("embeddings alone are enough")
   {
      std::filesystem::remove(dir / "hc.csv");
      std::ostringstream o;
      CHECK(cli::cmd_extract_check(dir, o, err) == cli::ok);
      CHECK(o.str().find("dataset") == std::string::npos);
   }
   SECTION("id sets must agree")
   {
      auto s = text::read_file(dir / "image.csv");
      s.replace(s.find("jibo"), 4, "kuri");
      text::write_file_atomic(dir / "image.csv", s);
      CHECK(cli::cmd_extract_check(dir, out, err) == cli::invalid_data);
      CHECK_THAT(err.str(), Catch::Matchers::ContainsSubstring("id set differs"));
   }
   SECTION("embedding header must be e0..e{d-1}")
   {
      auto s = text::read_file(dir / "metaphor.csv");
      s.replace(s.find("e3"), 2, "x3");
      text::write_file_atomic(dir / "metaphor.csv", s);
      CHECK(cli::cmd_extract_check(dir, out, err) == cli::invalid_data);
   }
   SECTION("non-finite embedding values")
   {
      auto s = text::read_file(dir / "image.csv");
      const auto pos = s.find("pepper,") + 7;
      s.replace(pos, s.find(',', pos) - pos, "nan");
      text::write_file_atomic(dir / "image.csv", s);
      CHECK(cli::cmd_extract_check(dir, out, err) == cli::invalid_data);
   }
}

TEST_CASE("argument parsers", "[cli]")
{
   CHECK(cli::parse_list("0.1,1,10") == std::vector<double>{0.1, 1.0, 10.0});
   CHECK_THROWS(cli::parse_list("1,x"));
   CHECK_FALSE(cli::parse_gamma("scale"));
   CHECK(*cli::parse_gamma("0.5") == 0.5);
   CHECK_THROWS(cli::parse_gamma("-1"));
   CHECK(cli::parse_format("csv") == ReportFormat::Csv);
   CHECK(cli::parse_format("md") == ReportFormat::Markdown);
   CHECK_THROWS(cli::parse_format("json"));
}
