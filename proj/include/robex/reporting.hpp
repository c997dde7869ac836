#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "robex/evaluation.hpp"
#include "robex/features.hpp"
#include "robex/text_io.hpp"

namespace robex
{
   inline constexpr std::string_view toolkit_version = "0.1.0";
   inline constexpr std::string_view baseline_label = "Predict Dataset Average (baseline)";

   enum class ReportFormat { Markdown, Csv };

   // Fixed-point with round-half-even applied to the exact binary value, so
   // the result does not depend on the platform's printf.
   inline std::string format_fixed(double v, int decimals)
   {
      if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
      // 1100 fractional digits hold the exact expansion of any double.
      std::string buf(1500, '\0');
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                     std::chars_format::fixed, 1100);
      if (res.ec != std::errc{}) {
         throw std::runtime_error("format_fixed: value too large");
      }
      buf.resize(static_cast<std::size_t>(res.ptr - buf.data()));

      bool negative = false;
      std::string_view s = buf;
      if (s.front() == '-') {
         negative = true;
         s.remove_prefix(1);
      }
      const auto dot = s.find('.');
      std::string digits(s.substr(0, dot));
      const std::string_view frac = s.substr(dot + 1);
      digits += frac.substr(0, static_cast<std::size_t>(decimals));
      const std::string_view dropped = frac.substr(static_cast<std::size_t>(decimals));

      bool round_up = false;
      if (!dropped.empty()) {
         const char first = dropped.front();
         const bool rest_nonzero = dropped.substr(1).find_first_not_of('0') != std::string_view::npos;
         if (first > '5' || (first == '5' && rest_nonzero)) round_up = true;
         else if (first == '5') round_up = ((digits.back() - '0') % 2) == 1;
      }
      if (round_up) {
         bool carry = true;
         for (std::size_t i = digits.size(); carry && i > 0; --i) {
            if (digits[i - 1] == '9') {
               digits[i - 1] = '0';
            }
            else {
               ++digits[i - 1];
               carry = false;
            }
         }
         if (carry) digits.insert(digits.begin(), '1');
      }
      const std::size_t int_len = digits.size() - static_cast<std::size_t>(decimals);
      std::string out = digits.substr(0, int_len);
      if (decimals > 0) out += "." + digits.substr(int_len);
      if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
      return out;
   }

   struct ReportCell
   {
      double mean_mse = 0.0;
      std::string value; // mean_mse at 3 decimals
      std::string stars;
      std::optional<double> p_value;
      bool is_best = false;
   };

   struct ReportTable
   {
      std::vector<std::string> row_labels; // 7 combos, then the baseline
      std::vector<std::array<ReportCell, construct_count>> rows;
   };

   class ReportError : public std::runtime_error
   {
   public:
      using std::runtime_error::runtime_error;
   };

   inline constexpr int report_decimals = 3;

   // Lays results out in report order and flags, per column, every non-baseline
   // cell whose printed value equals the column minimum.
   inline ReportTable build_table(const std::vector<CellResult>& results)
   {
      const auto combos = all_combos();
      std::map<std::pair<int, int>, const CellResult*> index; // (row, construct)
      for (const auto& r : results) {
         int row = static_cast<int>(combo_count);
         if (r.combo) {
            for (std::size_t k = 0; k < combos.size(); ++k) {
               if (combos[k] == *r.combo) row = static_cast<int>(k);
            }
         }
         index[{row, static_cast<int>(index_of(r.construct))}] = &r;
      }

      std::vector<std::string> missing;
      for (std::size_t row = 0; row <= combo_count; ++row) {
         for (const auto c : all_constructs) {
            if (!index.contains({static_cast<int>(row), static_cast<int>(index_of(c))})) {
               missing.push_back((row < combo_count ? combos[row].label() : std::string(baseline_label)) +
                                 " / " + std::string(display_name(c)));
            }
         }
      }
      if (!missing.empty()) {
         std::string msg = "incomplete results; missing " + std::to_string(missing.size()) + " cell(s):";
         for (const auto& m : missing) msg += "\n  " + m;
         throw ReportError(msg);
      }

      ReportTable t;
      for (std::size_t row = 0; row <= combo_count; ++row) {
         t.row_labels.push_back(row < combo_count ? combos[row].label() : std::string(baseline_label));
         std::array<ReportCell, construct_count> cells;
         for (const auto c : all_constructs) {
            const auto& r = *index.at({static_cast<int>(row), static_cast<int>(index_of(c))});
            auto& cell = cells[index_of(c)];
            cell.mean_mse = r.mean_mse;
            cell.value = format_fixed(r.mean_mse, report_decimals);
            cell.p_value = r.p_value;
            if (row < combo_count && r.p_value) cell.stars = std::string(stars(*r.p_value));
         }
         t.rows.push_back(std::move(cells));
      }

      for (std::size_t col = 0; col < construct_count; ++col) {
         // Ties are judged on the printed value.
         std::optional<double> best;
         for (std::size_t row = 0; row < combo_count; ++row) {
            const double printed = *text::parse_double(t.rows[row][col].value);
            if (!best || printed < *best) best = printed;
         }
         for (std::size_t row = 0; row < combo_count; ++row) {
            t.rows[row][col].is_best = *text::parse_double(t.rows[row][col].value) == *best;
         }
      }
      return t;
   }

   inline std::string render(const std::vector<CellResult>& results, ReportFormat format)
   {
      const auto t = build_table(results);
      std::string out;
      if (format == ReportFormat::Markdown) {
         out += "| Features Used |";
         for (const auto c : all_constructs) out += " " + std::string(display_name(c)) + " |";
         out += "\n|---|";
         for (std::size_t k = 0; k < construct_count; ++k) out += "---|";
         out += '\n';
         for (std::size_t row = 0; row < t.rows.size(); ++row) {
            out += "| " + t.row_labels[row] + " |";
            for (const auto& cell : t.rows[row]) {
               out += " ";
               out += cell.is_best ? "**" + cell.value + "**" : cell.value;
               out += cell.stars + " |";
            }
            out += '\n';
         }
         return out;
      }

      out += "combo,construct,mean_mse,p_value,stars,is_best\n";
      for (std::size_t row = 0; row < t.rows.size(); ++row) {
         for (const auto c : all_constructs) {
            const auto& cell = t.rows[row][index_of(c)];
            out += t.row_labels[row] + "," + std::string(column_key(c)) + "," + cell.value + ",";
            if (cell.p_value) out += text::format_double(*cell.p_value);
            out += "," + cell.stars + "," + (cell.is_best ? "1" : "0") + "\n";
         }
      }
      return out;
   }

   struct Provenance
   {
      std::uint64_t seed = default_seed;
      HyperParams hp;
      std::size_t k = default_folds;
      std::uint64_t dataset_hash = 0;
   };

   inline std::string footer(const Provenance& p)
   {
      char hash[17];
      std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(p.dataset_hash));
      std::string s = "robex " + std::string(toolkit_version);
      s += " | seed=" + std::to_string(p.seed);
      s += " C=" + text::format_double(p.hp.c);
      s += " epsilon=" + text::format_double(p.hp.epsilon);
      s += " gamma=" + (p.hp.gamma ? text::format_double(*p.hp.gamma) : std::string("scale"));
      s += " k=" + std::to_string(p.k);
      s += " | data=fnv1a:" + std::string(hash);
      s += " | note: gridsearch selects C and epsilon on this same fold plan";
      return s;
   }

   // Rendered table followed by the provenance line (a '#' comment in CSV).
   inline std::string report_document(const std::vector<CellResult>& results, ReportFormat format,
                                      const Provenance& p)
   {
      std::string out = render(results, format);
      out += format == ReportFormat::Markdown ? "\n" + footer(p) + "\n" : "# " + footer(p) + "\n";
      return out;
   }
}
