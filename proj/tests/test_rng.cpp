#include "tgf/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace tgf;

// Known-answer vectors of Philox4x64-10 (Random123 and numpy agree on these).
TEST(Philox, KnownAnswerZero)
{
    auto r = philox4x64({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(r[0], 0x16554d9eca36314cULL);
    EXPECT_EQ(r[1], 0xdb20fe9d672d0fdcULL);
    EXPECT_EQ(r[2], 0xd7e772cee186176bULL);
    EXPECT_EQ(r[3], 0x7e68b68aec7ba23bULL);
}

TEST(Philox, KnownAnswerNumpyStreams)
{
    auto a = philox4x64({1, 0, 0, 0}, {0, 0});
    EXPECT_EQ(a[0], 0x02f4ba6408e4d89bULL);
    EXPECT_EQ(a[3], 0x907d7a052fd5b4dcULL);
    auto b = philox4x64({2, 2, 3, 4}, {5, 6});
    EXPECT_EQ(b[0], 0x92ab6a0e75619263ULL);
    EXPECT_EQ(b[1], 0xd8ff75bdc6bf8f60ULL);
    EXPECT_EQ(b[2], 0x450e124938725640ULL);
    EXPECT_EQ(b[3], 0x94eb1a7cffd20cbbULL);
    auto c = philox4x64({8, 0, 11, 0}, {0xdeadbeefULL, 42});
    EXPECT_EQ(c[0], 0xa41b5bcb1d29b3d7ULL);
    EXPECT_EQ(c[3], 0xd0c87e562aa6c8ecULL);
}

TEST(Normal, MomentsOfLargeBatch)
{
    const int n = 200000;
    double s = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        double z = normal_at(7, StreamTag::Wiener, 0, 0, u64(i));
        s += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    double m = s / n, v = s2 / n - m * m;
    EXPECT_LT(std::abs(m), 4.0 / std::sqrt(double(n)));
    EXPECT_NEAR(v, 1.0, 0.02);
    EXPECT_NEAR(s4 / n, 3.0, 0.1);
}

TEST(Normal, StreamsAreAddressedNotSequential)
{
    double a = normal_at(1, StreamTag::Wiener, 3, 2, 9);
    double b = normal_at(1, StreamTag::Wiener, 3, 2, 9);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, normal_at(2, StreamTag::Wiener, 3, 2, 9));
    EXPECT_NE(a, normal_at(1, StreamTag::Initial, 3, 2, 9));
    EXPECT_NE(a, normal_at(1, StreamTag::Wiener, 4, 2, 9));
}

TEST(Uniform, UnitInterval)
{
    for (u64 i = 0; i < 1000; ++i) {
        double u = uniform_at(3, StreamTag::Survey, i, 0, 0);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}
