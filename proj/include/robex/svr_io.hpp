#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "robex/svr.hpp"
#include "robex/text_io.hpp"

// Flat text model file. Keys come one per line; each support vector is one
// `sv` line holding its dual coefficient followed by its features. Doubles
// are written in shortest round-trip form, so a reloaded model predicts
// bitwise identically.
//
//   robex-svr-model 1
//   gamma 0.25
//   gamma_mode scale
//   c 1
//   epsilon 0.1
//   bias 0.7
//   train_dim 2
//   support_count 1
//   sv -0.5 0.1 0.2

namespace robex
{
   inline constexpr std::string_view model_magic = "robex-svr-model 1";

   inline std::string serialize_model(const SvrModel& m)
   {
      using text::format_double;
      std::string out(model_magic);
      out += "\ngamma " + format_double(m.gamma);
      out += std::string("\ngamma_mode ") + (m.hp.gamma ? "explicit" : "scale");
      out += "\nc " + format_double(m.hp.c);
      out += "\nepsilon " + format_double(m.hp.epsilon);
      out += "\nbias " + format_double(m.bias);
      out += "\ntrain_dim " + std::to_string(m.train_dim);
      out += "\nsupport_count " + std::to_string(m.support_count());
      out += '\n';
      for (std::size_t j = 0; j < m.support_count(); ++j) {
         out += "sv " + format_double(m.dual_coefs[j]);
         for (const double v : m.support_vectors.row(j)) out += " " + format_double(v);
         out += '\n';
      }
      return out;
   }

   class ModelFormatError : public std::runtime_error
   {
   public:
      ModelFormatError(std::size_t line, const std::string& what)
         : std::runtime_error("model file line " + std::to_string(line) + ": " + what)
      {}
   };

   inline SvrModel parse_model(std::string_view content)
   {
      std::vector<std::string_view> lines;
      for (auto l : text::split(content, '\n')) {
         if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
         lines.push_back(l);
      }
      if (lines.empty() || lines.front() != model_magic) {
         throw ModelFormatError(1, "missing header '" + std::string(model_magic) + "'");
      }

      auto number = [](std::string_view s, std::size_t line) {
         const auto v = text::parse_double(s);
         if (!v) throw ModelFormatError(line, "bad number '" + std::string(s) + "'");
         return *v;
      };
      auto count = [&](std::string_view s, std::size_t line) {
         const double v = number(s, line);
         if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw ModelFormatError(line, "bad count '" + std::string(s) + "'");
         }
         return static_cast<std::size_t>(v);
      };

      SvrModel m;
      std::optional<std::size_t> support_count;
      bool explicit_gamma = false;
      std::vector<double> sv_values;
      for (std::size_t i = 1; i < lines.size(); ++i) {
         const auto line = text::trim(lines[i]);
         if (line.empty()) continue;
         const auto sp = line.find(' ');
         const auto key = line.substr(0, sp);
         const auto rest = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
         const std::size_t ln = i + 1;
         if (key == "gamma") m.gamma = number(rest, ln);
         else if (key == "gamma_mode") {
            if (rest != "scale" && rest != "explicit") throw ModelFormatError(ln, "bad gamma_mode");
            explicit_gamma = rest == "explicit";
         }
         else if (key == "c") m.hp.c = number(rest, ln);
         else if (key == "epsilon") m.hp.epsilon = number(rest, ln);
         else if (key == "bias") m.bias = number(rest, ln);
         else if (key == "train_dim") m.train_dim = count(rest, ln);
         else if (key == "support_count") support_count = count(rest, ln);
         else if (key == "sv") {
            const auto fields = text::split(rest, ' ');
            if (fields.size() != m.train_dim + 1) {
               throw ModelFormatError(ln, "support vector has " + std::to_string(fields.size() - 1) +
                                             " features, expected " + std::to_string(m.train_dim));
            }
            m.dual_coefs.push_back(number(fields[0], ln));
            for (std::size_t k = 1; k < fields.size(); ++k) sv_values.push_back(number(fields[k], ln));
         }
         else {
            throw ModelFormatError(ln, "unknown key '" + std::string(key) + "'");
         }
      }
      if (!support_count || *support_count != m.dual_coefs.size()) {
         throw ModelFormatError(lines.size(), "support_count does not match sv lines");
      }
      if (explicit_gamma) m.hp.gamma = m.gamma;
      m.hp.check();
      m.support_vectors = Matrix(m.dual_coefs.size(), m.train_dim, std::move(sv_values));
      return m;
   }

   inline void save_model(const SvrModel& m, const std::filesystem::path& p)
   {
      text::write_file_atomic(p, serialize_model(m));
   }

   inline SvrModel load_model(const std::filesystem::path& p)
   {
      return parse_model(text::read_file(p));
   }
}
