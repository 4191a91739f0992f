#include <doctest.h>

#include <cmath>
#include <random>

#include "injurycast/csv.hpp"
#include "injurycast/date.hpp"
#include "injurycast/errors.hpp"
#include "support.hpp"

using namespace injurycast;

TEST_CASE("dates parse strictly") {
    CHECK(Date::parse("2020-02-29").has_value());
    CHECK_FALSE(Date::parse("2021-02-29").has_value());
    CHECK_FALSE(Date::parse("2020-13-40").has_value());
    CHECK_FALSE(Date::parse("2020-1-05").has_value());
    CHECK_FALSE(Date::parse("2020-01-05 ").has_value());
    CHECK_FALSE(Date::parse("").has_value());
    CHECK_THROWS_AS(Date::from_ymd(2021, 2, 29), std::invalid_argument);
}

TEST_CASE("date arithmetic round-trips through iso text") {
    const Date d = Date::from_ymd(2019, 12, 31);
    CHECK((d + 1).iso() == "2020-01-01");
    CHECK((d + 60).iso() == "2020-02-29");
    CHECK(Date::from_ymd(2020, 3, 1) - d == 61);
    for (int k = -800; k <= 800; k += 7) CHECK(*Date::parse((d + k).iso()) == d + k);
}

TEST_CASE("csv parser handles quotes, CRLF and a byte-order mark") {
    const auto t = csv::parse("\xEF\xBB\xBF" "a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\r\n,,\n");
    REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[0][2] == "he said \"hi\"");
    CHECK(t.rows[1] == std::vector<std::string>{"", "", ""});
    CHECK(t.column("c") == 2u);
    CHECK_FALSE(t.column("d").has_value());
}

TEST_CASE("escape and parse are inverse") {
    for (std::string s : {"plain", "with,comma", "with \"quote\"", "line\nbreak", ""}) {
        const auto t = csv::parse("h\n" + csv::escape(s) + "\n");
        const std::string got = t.rows.empty() ? std::string() : t.rows[0][0];
        CHECK(got == s);
    }
}

TEST_CASE("numbers round-trip exactly through their text form") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        CHECK(*csv::parse_number(csv::format_number(v)) == v);
    }
    CHECK(csv::format_number(std::nan("")).empty());
    CHECK_FALSE(csv::parse_number("1.5x").has_value());
    CHECK_FALSE(csv::parse_number("inf").has_value());
    CHECK_FALSE(csv::parse_number("").has_value());
}

TEST_CASE("atomic writes create parents and replace content") {
    const auto dir = testsupport::temp_dir("csv");
    const auto path = dir / "a" / "b" / "out.txt";
    csv::write_file_atomic(path, "first");
    csv::write_file_atomic(path, "second");
    CHECK(csv::read_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    CHECK_THROWS_AS(csv::read_file(dir / "missing.csv"), DataError);
    std::filesystem::remove_all(dir);
}
