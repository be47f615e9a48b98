#include <atomic>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "ineq/parallel.hpp"

using namespace ineq;

TEST(ParallelFor, EachIndexOnce)
{
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, ZeroCountAndSingleWorker)
{
    int calls = 0;
    parallel_for(0, 3, [&](std::size_t) { ++calls; });
    EXPECT_EQ(calls, 0);
    parallel_for(5, 1, [&](std::size_t) { ++calls; });
    EXPECT_EQ(calls, 5);
}

TEST(ParallelFor, RethrowsWorkerException)
{
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::size_t i) {
                                  if (i == 37) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(DefaultWorkerCount, AtLeastOne)
{
    EXPECT_GE(default_worker_count(), 1u);
}
