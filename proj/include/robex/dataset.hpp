#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "robex/text_io.hpp"

namespace robex
{
   // The six rated constructs, in report column order.
   enum class Construct : std::uint8_t {
      Warmth,
      Competence,
      Discomfort,
      PerceptionAndInterpretation,
      TactileInteraction,
      NonverbalCommunication,
   };

   inline constexpr std::size_t construct_count = 6;

   inline constexpr std::array<Construct, construct_count> all_constructs{
      Construct::Warmth,
      Construct::Competence,
      Construct::Discomfort,
      Construct::PerceptionAndInterpretation,
      Construct::TactileInteraction,
      Construct::NonverbalCommunication,
   };

   constexpr std::size_t index_of(Construct c) noexcept { return static_cast<std::size_t>(c); }

   constexpr std::string_view display_name(Construct c) noexcept
   {
      constexpr std::array<std::string_view, construct_count> names{
         "Warmth",
         "Competence",
         "Discomfort",
         "Perception and Interpretation",
         "Tactile Interaction",
         "Nonverbal Communication",
      };
      return names[index_of(c)];
   }

   // Column key used in labels.csv and in CSV reports.
   constexpr std::string_view column_key(Construct c) noexcept
   {
      constexpr std::array<std::string_view, construct_count> keys{
         "warmth",
         "competence",
         "discomfort",
         "perception_interpretation",
         "tactile_interaction",
         "nonverbal_communication",
      };
      return keys[index_of(c)];
   }

   enum class Modality : std::uint8_t { HandCrafted, Metaphor, Image };

   inline constexpr std::size_t modality_count = 3;

   inline constexpr std::array<Modality, modality_count> all_modalities{
      Modality::HandCrafted, Modality::Metaphor, Modality::Image};

   constexpr std::size_t index_of(Modality m) noexcept { return static_cast<std::size_t>(m); }

   constexpr std::string_view short_name(Modality m) noexcept
   {
      constexpr std::array<std::string_view, modality_count> names{"HC", "M", "IM"};
      return names[index_of(m)];
   }

   constexpr std::string_view file_name(Modality m) noexcept
   {
      constexpr std::array<std::string_view, modality_count> names{"hc.csv", "metaphor.csv",
                                                                   "image.csv"};
      return names[index_of(m)];
   }

   // Header column prefix: f0.. for hand-crafted, e0.. for embeddings.
   constexpr char column_prefix(Modality m) noexcept { return m == Modality::HandCrafted ? 'f' : 'e'; }

   inline constexpr std::string_view labels_file = "labels.csv";
   inline constexpr std::string_view manifest_file = "manifest.toml";

   inline constexpr double hc_min = 0.0;
   inline constexpr double hc_max = 1.0;
   inline constexpr double label_min = -3.0;
   inline constexpr double label_max = 3.0;

   inline constexpr std::size_t reference_robot_count = 165;
   inline constexpr std::size_t reference_hc_dim = 59;

   using LabelSet = std::array<double, construct_count>;

   struct RobotRecord
   {
      std::string id;
      std::vector<double> hc;
      std::vector<double> metaphor_emb;
      std::vector<double> image_emb;
      LabelSet labels{};

      const std::vector<double>& block(Modality m) const noexcept
      {
         switch (m) {
         case Modality::HandCrafted: return hc;
         case Modality::Metaphor: return metaphor_emb;
         case Modality::Image: break;
         }
         return image_emb;
      }
      std::vector<double>& block(Modality m) noexcept
      {
         return const_cast<std::vector<double>&>(std::as_const(*this).block(m));
      }

      double label(Construct c) const noexcept { return labels[index_of(c)]; }

      friend bool operator==(const RobotRecord&, const RobotRecord&) = default;
   };

   struct Dataset
   {
      std::vector<RobotRecord> robots;
      std::array<std::size_t, modality_count> dims{};
      bool expect_reference_shape = false;

      std::size_t size() const noexcept { return robots.size(); }
      std::size_t dim(Modality m) const noexcept { return dims[index_of(m)]; }

      friend bool operator==(const Dataset&, const Dataset&) = default;
   };

   struct Violation
   {
      std::string robot_id; // empty for dataset-level violations
      std::string field;
      std::string rule;

      std::string to_string() const
      {
         std::string s = robot_id.empty() ? std::string("<dataset>") : robot_id;
         s += ": ";
         s += field;
         s += ": ";
         s += rule;
         return s;
      }
   };

   // Returned-not-thrown check of every record and shape invariant.
   inline std::vector<Violation> validate(const Dataset& ds)
   {
      std::vector<Violation> out;
      std::unordered_set<std::string> seen;

      for (const auto m : all_modalities) {
         if (ds.dim(m) == 0) {
            out.push_back({"", std::string(short_name(m)), "dimension must be positive"});
         }
      }
      if (ds.expect_reference_shape) {
         if (ds.size() != reference_robot_count) {
            out.push_back({"", "robots",
                           "reference shape expects " + std::to_string(reference_robot_count) +
                              " robots, found " + std::to_string(ds.size())});
         }
         if (ds.dim(Modality::HandCrafted) != reference_hc_dim) {
            out.push_back({"", "HC",
                           "reference shape expects " + std::to_string(reference_hc_dim) +
                              " hand-crafted features, found " +
                              std::to_string(ds.dim(Modality::HandCrafted))});
         }
      }

      for (const auto& r : ds.robots) {
         if (r.id.empty()) {
            out.push_back({"", "id", "robot id must be non-empty"});
         }
         else if (!seen.insert(r.id).second) {
            out.push_back({r.id, "id", "duplicate robot id"});
         }
         for (const auto m : all_modalities) {
            const auto& b = r.block(m);
            const auto field = std::string(short_name(m));
            if (b.size() != ds.dim(m)) {
               out.push_back({r.id, field,
                              "dimension mismatch: length " + std::to_string(b.size()) +
                                 ", expected " + std::to_string(ds.dim(m))});
            }
            for (std::size_t j = 0; j < b.size(); ++j) {
               if (!std::isfinite(b[j])) {
                  out.push_back({r.id, field + "[" + std::to_string(j) + "]",
                                 "value must be finite"});
               }
               else if (m == Modality::HandCrafted && (b[j] < hc_min || b[j] > hc_max)) {
                  out.push_back({r.id, field + "[" + std::to_string(j) + "]",
                                 "hand-crafted value " + text::format_double(b[j]) +
                                    " outside [0, 1]"});
               }
            }
         }
         for (const auto c : all_constructs) {
            const double v = r.label(c);
            if (!std::isfinite(v)) {
               out.push_back({r.id, std::string(display_name(c)), "label must be finite"});
            }
            else if (v < label_min || v > label_max) {
               out.push_back({r.id, std::string(display_name(c)),
                              "label " + text::format_double(v) + " outside [-3, 3]"});
            }
         }
      }
      return out;
   }

   // Load failure carrying the file, 1-based line and robot id when known.
   class DatasetError : public std::runtime_error
   {
   public:
      DatasetError(std::string file, std::size_t line, std::string id, const std::string& what)
         : std::runtime_error(compose(file, line, id, what)),
           file_(std::move(file)),
           line_(line),
           id_(std::move(id))
      {}

      const std::string& file() const noexcept { return file_; }
      std::size_t line() const noexcept { return line_; }
      const std::string& id() const noexcept { return id_; }

      // Set when the files parsed but the assembled dataset broke an invariant.
      const std::vector<Violation>& violations() const noexcept { return violations_; }

      static DatasetError invalid(std::vector<Violation> v)
      {
         DatasetError e("<dataset>", 0, v.front().robot_id,
                        v.front().field + ": " + v.front().rule +
                           (v.size() > 1 ? " (+" + std::to_string(v.size() - 1) + " more)" : ""));
         e.violations_ = std::move(v);
         return e;
      }

   private:
      static std::string compose(const std::string& file, std::size_t line, const std::string& id,
                                 const std::string& what)
      {
         std::string s = file;
         if (line > 0) s += ":" + std::to_string(line);
         if (!id.empty()) s += " (id " + id + ")";
         s += ": " + what;
         return s;
      }

      std::string file_;
      std::size_t line_;
      std::string id_;
      std::vector<Violation> violations_;
   };

   namespace detail
   {
      struct CsvRow
      {
         std::size_t line;
         std::string id;
         std::vector<double> values;
      };

      struct CsvTable
      {
         std::vector<std::string> header;
         std::vector<CsvRow> rows;
      };

      inline std::vector<std::string> header_fields(std::string_view line)
      {
         std::vector<std::string> out;
         for (const auto f : text::split(line)) out.emplace_back(text::trim(f));
         return out;
      }

      // Reads a comma separated numeric table whose first column is the id.
      inline CsvTable read_numeric_csv(const std::filesystem::path& path)
      {
         const auto name = path.filename().string();
         if (!std::filesystem::is_regular_file(path)) {
            throw DatasetError(name, 0, "", "missing file " + path.string());
         }
         const std::string content = text::read_file(path);
         std::string_view rest = content;
         if (rest.starts_with("\xEF\xBB\xBF")) rest.remove_prefix(3);

         CsvTable table;
         std::unordered_set<std::string> ids;
         std::size_t line_no = 0;
         bool have_header = false;
         while (!rest.empty()) {
            const auto nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (text::trim(line).empty()) continue;

            if (!have_header) {
               table.header = header_fields(line);
               if (table.header.empty() || table.header.front() != "id") {
                  throw DatasetError(name, line_no, "", "header must start with column 'id'");
               }
               have_header = true;
               continue;
            }

            const auto fields = text::split(line);
            const std::string id(text::trim(fields.front()));
            if (id.empty()) {
               throw DatasetError(name, line_no, "", "empty robot id");
            }
            if (fields.size() != table.header.size()) {
               throw DatasetError(name, line_no, id,
                                  "ragged row: " + std::to_string(fields.size()) +
                                     " fields, header has " + std::to_string(table.header.size()));
            }
            if (!ids.insert(id).second) {
               throw DatasetError(name, line_no, id, "duplicate id");
            }
            CsvRow row{line_no, id, {}};
            row.values.reserve(fields.size() - 1);
            for (std::size_t j = 1; j < fields.size(); ++j) {
               const auto v = text::parse_double(fields[j]);
               if (!v) {
                  throw DatasetError(name, line_no, id,
                                     "unparseable number '" + std::string(fields[j]) +
                                        "' in column " + std::to_string(j - 1) + " (" +
                                        table.header[j] + ")");
               }
               if (!std::isfinite(*v)) {
                  throw DatasetError(name, line_no, id,
                                     "non-finite value in column " + std::to_string(j - 1) + " (" +
                                        table.header[j] + ")");
               }
               row.values.push_back(*v);
            }
            table.rows.push_back(std::move(row));
         }
         if (!have_header) {
            throw DatasetError(name, 0, "", "file is empty (no header row)");
         }
         return table;
      }

      inline void check_block_header(const CsvTable& t, Modality m)
      {
         const auto name = std::string(file_name(m));
         if (t.header.size() < 2) {
            throw DatasetError(name, 1, "", "header declares no feature columns");
         }
         for (std::size_t j = 1; j < t.header.size(); ++j) {
            const auto expected = std::string(1, column_prefix(m)) + std::to_string(j - 1);
            if (t.header[j] != expected) {
               throw DatasetError(name, 1, "",
                                  "schema error: column " + std::to_string(j) + " is '" +
                                     t.header[j] + "', expected '" + expected + "'");
            }
         }
      }

      inline void check_labels_header(const CsvTable& t)
      {
         std::vector<std::string> missing;
         std::string expected = "id";
         for (const auto c : all_constructs) {
            expected += ",";
            expected += column_key(c);
         }
         bool ok = t.header.size() == construct_count + 1;
         for (std::size_t k = 0; k < construct_count; ++k) {
            const auto key = std::string(column_key(all_constructs[k]));
            if (std::find(t.header.begin(), t.header.end(), key) == t.header.end()) {
               missing.push_back(key);
            }
            if (ok && t.header[k + 1] != key) ok = false;
         }
         if (!ok) {
            std::string msg = "schema error: expected the 6 construct columns '" + expected + "'";
            if (!missing.empty()) {
               msg += "; missing:";
               for (const auto& k : missing) msg += " " + k;
            }
            throw DatasetError(std::string(labels_file), 1, "", msg);
         }
      }

      inline std::optional<bool> parse_bool(std::string_view v)
      {
         v = text::trim(v);
         if (v == "true") return true;
         if (v == "false") return false;
         return std::nullopt;
      }

      // `key = value` lines; '#' starts a comment. Only expect_reference_shape
      // is interpreted, other keys are ignored.
      inline bool read_manifest(const std::filesystem::path& dir)
      {
         const auto path = dir / manifest_file;
         if (!std::filesystem::exists(path)) return false;
         const std::string content = text::read_file(path);
         bool expect = false;
         std::size_t line_no = 0;
         for (auto line : text::split(content, '\n')) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) {
               line = line.substr(0, hash);
            }
            line = text::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
               throw DatasetError(std::string(manifest_file), line_no, "", "expected key = value");
            }
            const auto key = text::trim(line.substr(0, eq));
            if (key == "expect_reference_shape") {
               const auto v = parse_bool(line.substr(eq + 1));
               if (!v) {
                  throw DatasetError(std::string(manifest_file), line_no, "",
                                     "expect_reference_shape must be true or false");
               }
               expect = *v;
            }
         }
         return expect;
      }
   }

   struct LoadOptions
   {
      // Overrides the manifest when set.
      std::optional<bool> expect_reference_shape;
   };

   // Joins hc.csv, metaphor.csv, image.csv and labels.csv on id. Robots are
   // ordered by first appearance in labels.csv.
   inline Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& opts = {})
   {
      const auto labels = detail::read_numeric_csv(dir / labels_file);
      detail::check_labels_header(labels);

      std::array<detail::CsvTable, modality_count> blocks;
      for (const auto m : all_modalities) {
         blocks[index_of(m)] = detail::read_numeric_csv(dir / file_name(m));
         detail::check_block_header(blocks[index_of(m)], m);
      }

      Dataset ds;
      ds.expect_reference_shape = opts.expect_reference_shape.value_or(detail::read_manifest(dir));
      for (const auto m : all_modalities) {
         ds.dims[index_of(m)] = blocks[index_of(m)].header.size() - 1;
      }

      std::unordered_map<std::string, std::size_t> position;
      ds.robots.reserve(labels.rows.size());
      for (const auto& row : labels.rows) {
         RobotRecord r;
         r.id = row.id;
         for (std::size_t k = 0; k < construct_count; ++k) {
            const double v = row.values[k];
            if (v < label_min || v > label_max) {
               throw DatasetError(std::string(labels_file), row.line, row.id,
                                  "value " + text::format_double(v) + " in column " +
                                     std::to_string(k) + " (" +
                                     std::string(column_key(all_constructs[k])) +
                                     ") outside [-3, 3]");
            }
            r.labels[k] = v;
         }
         position.emplace(r.id, ds.robots.size());
         ds.robots.push_back(std::move(r));
      }

      for (const auto m : all_modalities) {
         const auto& t = blocks[index_of(m)];
         const auto name = std::string(file_name(m));
         std::vector<bool> filled(ds.robots.size(), false);
         for (const auto& row : t.rows) {
            const auto it = position.find(row.id);
            if (it == position.end()) {
               throw DatasetError(name, row.line, row.id,
                                  "id not present in " + std::string(labels_file));
            }
            if (m == Modality::HandCrafted) {
               for (std::size_t j = 0; j < row.values.size(); ++j) {
                  const double v = row.values[j];
                  if (v < hc_min || v > hc_max) {
                     throw DatasetError(name, row.line, row.id,
                                        "value " + text::format_double(v) + " in column " +
                                           std::to_string(j) + " outside [0, 1]");
                  }
               }
            }
            ds.robots[it->second].block(m) = row.values;
            filled[it->second] = true;
         }
         for (std::size_t i = 0; i < filled.size(); ++i) {
            if (!filled[i]) {
               throw DatasetError(name, 0, ds.robots[i].id,
                                  "id from " + std::string(labels_file) + " missing in " + name);
            }
         }
      }

      if (auto v = validate(ds); !v.empty()) {
         throw DatasetError::invalid(std::move(v));
      }
      return ds;
   }

   // Writes the four CSVs (plus manifest.toml when the reference shape is
   // expected) with round-trip float precision.
   inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir)
   {
      std::filesystem::create_directories(dir);
      for (const auto m : all_modalities) {
         std::string out = "id";
         for (std::size_t j = 0; j < ds.dim(m); ++j) {
            out += ',';
            out += column_prefix(m);
            out += std::to_string(j);
         }
         out += '\n';
         for (const auto& r : ds.robots) {
            out += r.id;
            for (const double v : r.block(m)) {
               out += ',';
               out += text::format_double(v);
            }
            out += '\n';
         }
         text::write_file_atomic(dir / file_name(m), out);
      }
      std::string out = "id";
      for (const auto c : all_constructs) {
         out += ',';
         out += column_key(c);
      }
      out += '\n';
      for (const auto& r : ds.robots) {
         out += r.id;
         for (const double v : r.labels) {
            out += ',';
            out += text::format_double(v);
         }
         out += '\n';
      }
      text::write_file_atomic(dir / labels_file, out);
      if (ds.expect_reference_shape) {
         text::write_file_atomic(dir / manifest_file, "expect_reference_shape = true\n");
      }
   }

   // Content hash over the dataset files in a fixed order; used in report
   // provenance lines.
   inline std::uint64_t dataset_fingerprint(const std::filesystem::path& dir)
   {
      std::uint64_t h = text::fnv1a("");
      auto mix = [&](std::string_view name) {
         const auto p = dir / name;
         h = text::fnv1a(name, h);
         h = text::fnv1a(std::string_view("\0", 1), h);
         if (std::filesystem::exists(p)) h = text::fnv1a(text::read_file(p), h);
         h = text::fnv1a(std::string_view("\0", 1), h);
      };
      for (const auto m : all_modalities) mix(file_name(m));
      mix(labels_file);
      mix(manifest_file);
      return h;
   }
}
