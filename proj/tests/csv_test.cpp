#include <doctest.h>

#include <limits>

#include "lofscan/csv.hpp"

using namespace lofscan;

TEST_CASE("split_record handles plain fields") {
    std::vector<csv::Field> f;
    REQUIRE(csv::split_record("a,b,c", f));
    REQUIRE(f.size() == 3);
    CHECK(f[0].text == "a");
    CHECK(f[2].text == "c");
    CHECK(!f[0].quoted);
}

TEST_CASE("split_record handles quoting") {
    std::vector<csv::Field> f;
    REQUIRE(csv::split_record("1,\"two, three\",\"say \"\"hi\"\"\"", f));
    REQUIRE(f.size() == 3);
    CHECK(f[1].text == "two, three");
    CHECK(f[1].quoted);
    CHECK(f[2].text == "say \"hi\"");
}

TEST_CASE("split_record keeps empty fields") {
    std::vector<csv::Field> f;
    REQUIRE(csv::split_record("a,,c,", f));
    REQUIRE(f.size() == 4);
    CHECK(f[1].text.empty());
    CHECK(f[3].text.empty());
}

TEST_CASE("split_record rejects broken quoting") {
    std::vector<csv::Field> f;
    CHECK(!csv::split_record("\"open", f));
    CHECK(!csv::split_record("\"x\"y,z", f));
    CHECK(!csv::split_record("a\"b,c", f));
}

TEST_CASE("quote doubles embedded quotes") {
    CHECK(csv::quote("plain") == "\"plain\"");
    CHECK(csv::quote("a\"b") == "\"a\"\"b\"");
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(csv::format_double(26.0) == "26");
    CHECK(csv::format_double(27.1) == "27.1");
    CHECK(csv::format_double(-0.5) == "-0.5");
    CHECK(csv::format_double(1e21) == "1e+21");
    CHECK(csv::format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("format_double_trimmed drops trailing zeros") {
    CHECK(csv::format_double_trimmed(26.0, 1) == "26");
    CHECK(csv::format_double_trimmed(27.1, 1) == "27.1");
    CHECK(csv::format_double_trimmed(3.14159, 3) == "3.142");
    CHECK(csv::format_double_trimmed(-0.0001, 2) == "0");
}
