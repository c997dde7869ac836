#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

// Small text helpers shared by the CSV loader, model files, and reports.
namespace robex::text
{
   // Shortest representation that parses back to the identical double.
   inline std::string format_double(double v)
   {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      return std::string(buf, res.ptr);
   }

   // Parses a full field as a decimal or scientific literal. Leading '+' is
   // accepted; surrounding blanks are not part of the number and are trimmed.
   inline std::optional<double> parse_double(std::string_view s)
   {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
      if (!s.empty() && s.front() == '+') s.remove_prefix(1);
      if (s.empty()) return std::nullopt;
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
         return std::nullopt;
      }
      return v;
   }

   inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
   {
      std::vector<std::string_view> out;
      std::size_t start = 0;
      while (true) {
         const auto pos = line.find(sep, start);
         if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
         }
         out.push_back(line.substr(start, pos - start));
         start = pos + 1;
      }
      return out;
   }

   inline std::string_view trim(std::string_view s)
   {
      const auto ws = " \t\r\n";
      const auto b = s.find_first_not_of(ws);
      if (b == std::string_view::npos) return {};
      const auto e = s.find_last_not_of(ws);
      return s.substr(b, e - b + 1);
   }

   inline std::string read_file(const std::filesystem::path& p)
   {
      std::ifstream in(p, std::ios::binary);
      if (!in) {
         throw std::runtime_error("cannot open file: " + p.string());
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      return std::move(ss).str();
   }

   // Writes to a sibling temp file, then renames over the target so readers
   // never observe a truncated file.
   inline void write_file_atomic(const std::filesystem::path& p, std::string_view content)
   {
      auto tmp = p;
      tmp += ".tmp";
      {
         std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
         if (!out) {
            throw std::runtime_error("cannot write file: " + tmp.string());
         }
         out.write(content.data(), static_cast<std::streamsize>(content.size()));
         out.flush();
         if (!out) {
            throw std::runtime_error("write failed: " + tmp.string());
         }
      }
      std::error_code ec;
      std::filesystem::rename(tmp, p, ec);
      if (ec) {
         std::filesystem::remove(tmp);
         throw std::runtime_error("cannot rename " + tmp.string() + " to " + p.string() + ": " +
                                  ec.message());
      }
   }

   // 64-bit FNV-1a.
   inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ull)
   {
      for (const unsigned char c : bytes) {
         h ^= c;
         h *= 1099511628211ull;
      }
      return h;
   }
}
