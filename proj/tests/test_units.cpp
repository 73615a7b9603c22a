#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "dssim/units.hpp"

using namespace dssim;

TEST(Units, FormatsMicrosecondsExactly) {
    EXPECT_EQ(format_us(42000), "42");
    EXPECT_EQ(format_us(10500), "10.5");
    EXPECT_EQ(format_us(1), "0.001");
    EXPECT_EQ(format_us(0), "0");
    EXPECT_EQ(format_us(-1500), "-1.5");
    EXPECT_EQ(format_us(1000000000), "1000000");
}

TEST(Units, ParsesMicroseconds) {
    EXPECT_EQ(parse_us("42"), 42000);
    EXPECT_EQ(parse_us("10.5"), 10500);
    EXPECT_EQ(parse_us("0.001"), 1);
    EXPECT_EQ(parse_us("-2.25"), -2250);
}

TEST(Units, RejectsMalformedMicroseconds) {
    EXPECT_THROW(parse_us(""), std::invalid_argument);
    EXPECT_THROW(parse_us("1.2345"), std::invalid_argument);
    EXPECT_THROW(parse_us("1."), std::invalid_argument);
    EXPECT_THROW(parse_us("abc"), std::invalid_argument);
    EXPECT_THROW(parse_us("1e3"), std::invalid_argument);
}

TEST(Units, MicrosecondTextRoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<Nanos> ns(-5'000'000'000, 5'000'000'000);
    for (int i = 0; i < 2000; ++i) {
        const Nanos value = ns(rng);
        EXPECT_EQ(parse_us(format_us(value)), value) << value;
    }
}

TEST(Units, DoubleTextRoundTripsBitExact) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> real(-1e9, 1e9);
    for (int i = 0; i < 2000; ++i) {
        const double value = real(rng);
        EXPECT_EQ(parse_double(format_double(value)), value);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_THROW(parse_double("0.1x"), std::invalid_argument);
}

TEST(Units, PowerTimesTimeIsFemtojoules) {
    // 600 mW for 1000 µs is 0.6 mJ.
    const MicroWatts p = mw_to_uw(600);
    const Nanos t = us_to_ns(std::int64_t{1000});
    EXPECT_EQ(p * t, 600'000'000'000);
    EXPECT_DOUBLE_EQ(fj_to_mj(p * t), 0.6);
}
