#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace robex
{
   // Runs fn(i) for i in [0, count) on up to `jobs` threads. Tasks write into
   // their own slots, so results never depend on the thread count. If tasks
   // throw, the exception of the lowest failing index is rethrown.
   template <class Fn>
   void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn)
   {
      jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
      if (jobs == 1) {
         for (std::size_t i = 0; i < count; ++i) fn(i);
         return;
      }

      std::atomic<std::size_t> next{0};
      std::mutex mu;
      std::size_t failed_index = count;
      std::exception_ptr failure;

      auto worker = [&] {
         for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            {
               std::lock_guard lock(mu);
               if (failed_index < i) return;
            }
            try {
               fn(i);
            }
            catch (...) {
               std::lock_guard lock(mu);
               if (i < failed_index) {
                  failed_index = i;
                  failure = std::current_exception();
               }
            }
         }
      };

      std::vector<std::jthread> pool;
      pool.reserve(jobs);
      for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
      pool.clear();
      if (failure) std::rethrow_exception(failure);
   }
}
