#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "robex/dataset.hpp"
#include "robex/matrix.hpp"

namespace robex
{
   // Non-empty subset of modalities, stored as a bit mask (bit i = modality i).
   class ModalityCombo
   {
   public:
      constexpr ModalityCombo() = default;

      constexpr ModalityCombo(std::initializer_list<Modality> ms)
      {
         for (const auto m : ms) bits_ |= bit(m);
      }

      static constexpr ModalityCombo from_bits(std::uint8_t bits)
      {
         ModalityCombo c;
         c.bits_ = bits & 0b111u;
         return c;
      }

      constexpr bool contains(Modality m) const noexcept { return (bits_ & bit(m)) != 0; }
      constexpr bool empty() const noexcept { return bits_ == 0; }
      constexpr std::uint8_t bits() const noexcept { return bits_; }

      // Members in canonical HC, M, IM order.
      std::vector<Modality> members() const
      {
         std::vector<Modality> out;
         for (const auto m : all_modalities) {
            if (contains(m)) out.push_back(m);
         }
         return out;
      }

      // "HC + M + IM" style label.
      std::string label() const
      {
         std::string s;
         for (const auto m : members()) {
            if (!s.empty()) s += " + ";
            s += short_name(m);
         }
         return s;
      }

      friend constexpr bool operator==(ModalityCombo, ModalityCombo) = default;

   private:
      static constexpr std::uint8_t bit(Modality m) noexcept
      {
         return static_cast<std::uint8_t>(1u << index_of(m));
      }

      std::uint8_t bits_ = 0;
   };

   inline constexpr std::size_t combo_count = 7;

   // The seven combos in report row order.
   inline std::array<ModalityCombo, combo_count> all_combos()
   {
      using enum Modality;
      return {
         ModalityCombo{HandCrafted},
         ModalityCombo{Metaphor},
         ModalityCombo{Image},
         ModalityCombo{HandCrafted, Metaphor},
         ModalityCombo{HandCrafted, Image},
         ModalityCombo{Metaphor, Image},
         ModalityCombo{HandCrafted, Metaphor, Image},
      };
   }

   struct FeatureMatrix
   {
      Matrix values;
      std::vector<std::string> robot_ids;
      ModalityCombo combo;
      // Column offset of each member block, in canonical order.
      std::vector<std::size_t> block_offsets;

      std::size_t rows() const noexcept { return values.rows(); }
      std::size_t cols() const noexcept { return values.cols(); }
   };

   struct FuseOptions
   {
      // Z-score each embedding column (population sd; zero-sd columns are
      // only centered). Hand-crafted columns are never rescaled.
      bool standardize_embeddings = false;
   };

   // Horizontal concatenation of the combo's blocks in HC, M, IM order.
   inline FeatureMatrix fuse(const Dataset& ds, ModalityCombo combo, const FuseOptions& opts = {})
   {
      if (combo.empty()) {
         throw std::invalid_argument("fuse: modality combination is empty");
      }
      const auto members = combo.members();
      FeatureMatrix fm;
      fm.combo = combo;
      std::size_t cols = 0;
      for (const auto m : members) {
         fm.block_offsets.push_back(cols);
         cols += ds.dim(m);
      }
      fm.values = Matrix(ds.size(), cols);
      fm.robot_ids.reserve(ds.size());
      for (std::size_t i = 0; i < ds.size(); ++i) {
         const auto& r = ds.robots[i];
         fm.robot_ids.push_back(r.id);
         auto dst = fm.values.row(i).begin();
         for (const auto m : members) {
            const auto& b = r.block(m);
            if (b.size() != ds.dim(m)) {
               throw std::invalid_argument("fuse: robot " + r.id + " has a " +
                                           std::string(short_name(m)) +
                                           " block of the wrong length");
            }
            dst = std::copy(b.begin(), b.end(), dst);
         }
      }

      if (opts.standardize_embeddings && ds.size() > 0) {
         for (std::size_t k = 0; k < members.size(); ++k) {
            if (members[k] == Modality::HandCrafted) continue;
            const auto first = fm.block_offsets[k];
            for (std::size_t j = first; j < first + ds.dim(members[k]); ++j) {
               double mean = 0.0;
               for (std::size_t i = 0; i < fm.rows(); ++i) mean += fm.values(i, j);
               mean /= static_cast<double>(fm.rows());
               double var = 0.0;
               for (std::size_t i = 0; i < fm.rows(); ++i) {
                  const double d = fm.values(i, j) - mean;
                  var += d * d;
               }
               var /= static_cast<double>(fm.rows());
               const double sd = std::sqrt(var);
               for (std::size_t i = 0; i < fm.rows(); ++i) {
                  fm.values(i, j) -= mean;
                  if (sd > 0.0) fm.values(i, j) /= sd;
               }
            }
         }
      }
      return fm;
   }

   inline std::vector<double> label_vector(const Dataset& ds, Construct c)
   {
      std::vector<double> y;
      y.reserve(ds.size());
      for (const auto& r : ds.robots) y.push_back(r.label(c));
      return y;
   }
}
