#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace robex
{
   // Dense row-major matrix of doubles. Rows are handed out as spans so the
   // solver and kernel code never touch raw pointers.
   class Matrix
   {
   public:
      Matrix() = default;

      Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
         : rows_(rows), cols_(cols), values_(rows * cols, fill)
      {}

      Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
         : rows_(rows), cols_(cols), values_(std::move(values))
      {
         if (values_.size() != rows_ * cols_) {
            throw std::invalid_argument("Matrix: value count does not match rows * cols");
         }
      }

      static Matrix from_rows(const std::vector<std::vector<double>>& rows)
      {
         if (rows.empty()) {
            return {};
         }
         Matrix m(rows.size(), rows.front().size());
         for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
               throw std::invalid_argument("Matrix::from_rows: ragged rows");
            }
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
         }
         return m;
      }

      std::size_t rows() const noexcept { return rows_; }
      std::size_t cols() const noexcept { return cols_; }
      bool empty() const noexcept { return values_.empty(); }

      double& operator()(std::size_t r, std::size_t c) noexcept
      {
         assert(r < rows_ && c < cols_);
         return values_[r * cols_ + c];
      }
      double operator()(std::size_t r, std::size_t c) const noexcept
      {
         assert(r < rows_ && c < cols_);
         return values_[r * cols_ + c];
      }

      std::span<double> row(std::size_t r) noexcept
      {
         return {values_.data() + r * cols_, cols_};
      }
      std::span<const double> row(std::size_t r) const noexcept
      {
         return {values_.data() + r * cols_, cols_};
      }

      std::span<const double> values() const noexcept { return values_; }

      // Rows picked by index, in the order given.
      Matrix select_rows(std::span<const std::size_t> idx) const
      {
         Matrix out(idx.size(), cols_);
         for (std::size_t i = 0; i < idx.size(); ++i) {
            const auto src = row(idx[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
         }
         return out;
      }

      // Columns [first, first + count).
      Matrix col_block(std::size_t first, std::size_t count) const
      {
         if (first + count > cols_) {
            throw std::out_of_range("Matrix::col_block: block exceeds column count");
         }
         Matrix out(rows_, count);
         for (std::size_t r = 0; r < rows_; ++r) {
            const auto src = row(r).subspan(first, count);
            std::copy(src.begin(), src.end(), out.row(r).begin());
         }
         return out;
      }

      friend bool operator==(const Matrix&, const Matrix&) = default;

   private:
      std::size_t rows_ = 0;
      std::size_t cols_ = 0;
      std::vector<double> values_;
   };
}
