#include <doctest.h>

#include <stdexcept>

#include "plancache/money.hpp"

using namespace plancache;

TEST_CASE("parse and print exact decimals") {
  CHECK(Usd::parse("2.50").units() == 2'500'000'000'000);
  CHECK(Usd::parse("0.0075").to_string(4) == "0.0075");
  CHECK(Usd::parse("-1.5").to_string(2) == "-1.50");
  CHECK(Usd::parse("3").to_string(0) == "3");
  CHECK(Usd::parse("0.000000000001").units() == 1);
  CHECK_THROWS_AS(Usd::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(Usd::parse("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(Usd::parse("abc"), std::invalid_argument);
  CHECK_THROWS_AS(Usd::parse("0.0000000000001"), std::invalid_argument);
}

TEST_CASE("to_string rounds half to even") {
  CHECK(Usd::parse("0.125").to_string(2) == "0.12");
  CHECK(Usd::parse("0.135").to_string(2) == "0.14");
  CHECK(Usd::parse("0.1251").to_string(2) == "0.13");
  CHECK(Usd::parse("-0.125").to_string(2) == "-0.12");
  CHECK(Usd::parse("2.5").to_string(0) == "2");
}

TEST_CASE("divide_half_even") {
  CHECK(divide_half_even(5, 2) == 2);
  CHECK(divide_half_even(7, 2) == 4);
  CHECK(divide_half_even(-5, 2) == -2);
  CHECK(divide_half_even(10, 3) == 3);
  CHECK(divide_half_even(11, 3) == 4);
  CHECK_THROWS(divide_half_even(1, 0));
}

TEST_CASE("percent shares") {
  CHECK(percent_hundredths(Usd::parse("1"), Usd::parse("4")) == 2500);
  CHECK(format_percent(Usd::parse("1"), Usd::parse("3")) == "33.33");
  CHECK(format_percent(Usd::parse("2"), Usd::parse("3")) == "66.67");
  CHECK(percent_hundredths(Usd::parse("1"), Usd{}) == 0);
  CHECK(format_percent(Usd{}, Usd{}) == "0.00");
}

TEST_CASE("arithmetic and ordering") {
  const auto a = Usd::parse("0.1");
  const auto b = Usd::parse("0.2");
  CHECK((a + b) == Usd::parse("0.3"));
  CHECK((b - a) == a);
  CHECK(a < b);
  Usd sum;
  for (int i = 0; i < 1000; ++i) sum += Usd::parse("0.001");
  CHECK(sum == Usd::parse("1"));
}
