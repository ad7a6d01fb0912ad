#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "sdforest/parallel.hpp"

using namespace sdf;

TEST(Parallel, CoversRangeExactlyOnce) {
  for (int threads : {1, 2, 3, 8}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  parallel_for(0, 4, [](std::size_t, std::size_t) { FAIL(); });
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](std::size_t b, std::size_t) {
                              if (b > 0) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, ThreadCountFromEnvironment) {
  ::setenv("SDFOREST_THREADS", "3", 1);
  EXPECT_EQ(default_thread_count(), 3);
  EXPECT_EQ(resolve_thread_count(0), 3);
  EXPECT_EQ(resolve_thread_count(5), 5);
  ::setenv("SDFOREST_THREADS", "0", 1);
  EXPECT_GE(default_thread_count(), 1);
  ::unsetenv("SDFOREST_THREADS");
}
