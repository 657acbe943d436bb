#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "wlab/parallel.hpp"
#include "wlab/rng.hpp"

using namespace wlab::rng;

TEST(Philox, KnownAnswers) {
    EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
              (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, PurposesGiveDistinctKeys) {
    std::set<Key> keys;
    for (Purpose p : {Purpose::Sampling, Purpose::Hessian, Purpose::ImportanceMc, Purpose::CdfOracle}) {
        keys.insert(derive_key(42, p));
    }
    EXPECT_EQ(keys.size(), 4u);
    EXPECT_NE(derive_key(1, Purpose::Sampling), derive_key(2, Purpose::Sampling));
}

TEST(Philox, UniformsInRange) {
    Substream s(derive_key(3, Purpose::Sampling), 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
    EXPECT_GT(to_unit_open_closed(0, 0), 0.0);
    EXPECT_LE(to_unit_open_closed(0xffffffff, 0xffffffff), 1.0);
}

TEST(Philox, NormalMoments) {
    Substream s(derive_key(5, Purpose::Sampling), 9, 2);
    const int m = 400000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < m; ++i) {
        const double z = s.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(m));
    EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
    EXPECT_NEAR(s4 / m, 3.0, 5.0 * std::sqrt(96.0 / m));
}

TEST(Philox, SubstreamsAreReproducible) {
    const Key k = derive_key(7, Purpose::Sampling);
    Substream a(k, 11, 3);
    Substream b(k, 11, 3);
    Substream c(k, 11, 4);
    for (int i = 0; i < 10; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        EXPECT_NE(x, c.normal());
    }
}

TEST(Parallel, ChunkResultsIndependentOfThreads) {
    auto run = [](std::size_t threads) {
        return wlab::map_chunks<double>(1000, 37, threads, [](wlab::ChunkRange r) {
            double s = 0;
            for (std::size_t i = r.begin; i < r.end; ++i) s += std::sin(static_cast<double>(i));
            return s;
        });
    };
    EXPECT_EQ(run(1), run(3));
    EXPECT_EQ(run(1).size(), 28u);
}

TEST(Parallel, ExceptionsPropagate) {
    EXPECT_THROW(wlab::map_chunks<int>(100, 10, 2,
                                       [](wlab::ChunkRange r) -> int {
                                           if (r.index == 5) throw std::runtime_error("boom");
                                           return 0;
                                       }),
                 std::runtime_error);
}
