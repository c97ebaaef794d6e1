#include <gtest/gtest.h>

#include "dsm/time.hpp"

using namespace dsm;
using namespace std::chrono;

TEST(Time, DateRoundTrip) {
  EXPECT_EQ(format_date(parse_date("2024-03-04")), "2024-03-04");
  EXPECT_EQ(format_date(parse_date("2024-02-29")), "2024-02-29");
  EXPECT_THROW(parse_date("2023-02-29"), validation_error);
  EXPECT_THROW(parse_date("2024-3-4"), validation_error);
  EXPECT_THROW(parse_date("2024/03/04"), validation_error);
}

TEST(Time, TimestampRoundTrip) {
  auto t = parse_timestamp("2024-03-04T18:05:09Z");
  EXPECT_EQ(format_timestamp(t), "2024-03-04T18:05:09Z");
  EXPECT_EQ(day_of(t), parse_date("2024-03-04"));
  EXPECT_EQ(parse_timestamp("2024-03-04"), timestamp{parse_date("2024-03-04")});
  EXPECT_THROW(parse_timestamp("2024-03-04T24:00:00Z"), validation_error);
  EXPECT_THROW(parse_timestamp("2024-03-04T10:00:00+09:00"), validation_error);
}

TEST(Time, TimeOfDay) {
  EXPECT_EQ(parse_time_of_day("08:30"), minutes{510});
  EXPECT_EQ(format_time_of_day(minutes{1439}), "23:59");
  EXPECT_THROW(parse_time_of_day("24:00"), validation_error);
  EXPECT_THROW(parse_time_of_day("8:30"), validation_error);
}

TEST(Time, RangeIsInclusive) {
  date_range r{parse_date("2024-03-04"), parse_date("2024-03-10")};
  EXPECT_EQ(r.days(), 7);
  EXPECT_TRUE(r.contains(parse_date("2024-03-04")));
  EXPECT_TRUE(r.contains(parse_date("2024-03-10")));
  EXPECT_FALSE(r.contains(parse_date("2024-03-11")));
}
