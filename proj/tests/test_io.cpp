// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "kesten/io.hpp"
#include "kesten/svg.hpp"

using namespace kesten;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("kesten_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

io::CsvTable parse(const std::string& text, std::vector<std::string> cols) {
    std::istringstream in(text);
    return io::read_csv(in, "mem.csv", cols);
}

}  // namespace

TEST(FormatDouble, RoundTrips) {
    RngStream rng(1, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(2000)) - 1000);
        EXPECT_EQ(std::stod(io::format_double(v)), v);
    }
    EXPECT_EQ(io::format_double(0.5), "0.5");
    EXPECT_EQ(io::format_double(1e300), "1e+300");
}

TEST(Hash, KnownValues) {
    EXPECT_EQ(io::hex64(io::fnv1a64("")), "cbf29ce484222325");
    EXPECT_EQ(io::hex64(io::fnv1a64("a")), "af63dc4c8601ec8c");
}

TEST(Csv, ParsesRows) {
    const auto t = parse("a,b\n1,2\n 3.5 , -4e2\r\n\n", {"a", "b"});
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][0], 3.5);
    EXPECT_EQ(t.rows[1][1], -400.0);
    EXPECT_EQ(t.lines[1], 3u);
}

TEST(Csv, MissingColumnNamedInError) {
    try {
        parse("wealth,exc\n1,0\n", {"wealth", "exceedance"});
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("missing column 'exceedance' in header"), std::string::npos);
        EXPECT_EQ(e.line(), 1u);
    }
}

TEST(Csv, RejectsMalformedInput) {
    EXPECT_THROW(parse("", {"a"}), ParseError);
    EXPECT_THROW(parse("a,b,c\n", {"a", "b"}), ParseError);
    EXPECT_THROW(parse("a,b\n1\n", {"a", "b"}), ParseError);
    EXPECT_THROW(parse("a,b\n1,x\n", {"a", "b"}), ParseError);
    EXPECT_THROW(parse("a,b\n1,nan\n", {"a", "b"}), ParseError);
    EXPECT_THROW(parse("a,b\n1,inf\n", {"a", "b"}), ParseError);
    EXPECT_THROW(parse("a,b\n1,2\n\n3,4\n", {"a", "b"}), ParseError);
    EXPECT_THROW(parse("a,b\n1,2 3\n", {"a", "b"}), ParseError);
    try {
        parse("a,b\n1,2\n3,oops\n", {"a", "b"});
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.file(), "mem.csv");
    }
}

TEST(Csv, ErrorsAreInputErrors) {
    EXPECT_THROW(parse("x\n", {"a"}), InputError);
    EXPECT_THROW(io::read_csv(fs::path("/nonexistent/kesten.csv"), {"a"}), InputError);
}

TEST(TailCsv, RoundTrip) {
    EmpiricalTail tail;
    RngStream rng(2, 0, 0);
    double w = 1.0;
    double e = 1.0;
    for (int i = 0; i < 500; ++i) {
        w *= 1.0 + rng.uniform();
        e *= rng.uniform();
        tail.points.push_back({w, e});
    }
    std::istringstream in(io::tail_csv(tail));
    const auto back = io::read_tail_csv(in, "tail.csv");
    EXPECT_EQ(back.points, tail.points);
}

TEST(TailCsv, RejectsNonMonotone) {
    std::istringstream in("wealth,exceedance\n1,0.5\n2,0.6\n");
    try {
        io::read_tail_csv(in, "t.csv");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream dup("wealth,exceedance\n1,0.5\n1,0.4\n");
    EXPECT_THROW(io::read_tail_csv(dup, "t.csv"), ParseError);
}

TEST(Survey, ReadsFilesAndMeta) {
    const auto dir = scratch_dir("survey");
    io::write_text(dir / "s.csv", "cum_household_prop,cum_wealth_prop\n0,0\n0.5,0.2\n1,1\n");
    io::write_text(dir / "m.json", R"({"year": 2010, "households": 10, "total_wealth_gbp": 1000})");
    const auto s = io::read_survey(dir / "s.csv", dir / "m.json");
    EXPECT_EQ(s.year, 2010);
    EXPECT_EQ(s.households_total, 10.0);
    EXPECT_EQ(s.rows.size(), 3u);
    io::write_text(dir / "bad.json", R"({"year": 2010, "households": 10})");
    EXPECT_THROW(io::read_survey(dir / "s.csv", dir / "bad.json"), ParseError);
    io::write_text(dir / "broken.json", "{");
    EXPECT_THROW(io::read_survey(dir / "s.csv", dir / "broken.json"), ParseError);
}

TEST(RichList, RejectsNonPositive) {
    const auto dir = scratch_dir("rich");
    io::write_text(dir / "r.csv", "rank,wealth_gbp\n1,5e9\n2,-1\n");
    EXPECT_THROW(io::read_rich_list(dir / "r.csv", 1e6), ParseError);
    io::write_text(dir / "r.csv", "rank,wealth_gbp\n");
    EXPECT_THROW(io::read_rich_list(dir / "r.csv", 1e6), ParseError);
    io::write_text(dir / "r.csv", "rank,wealth_gbp\n1,5e9\n2,3e9\n");
    EXPECT_EQ(io::read_rich_list(dir / "r.csv", 1e6).wealth.size(), 2u);
}

TEST(Checkpoint, RoundTrip) {
    const auto dir = scratch_dir("checkpoint");
    auto pop = Population::from_wealth({1.5, 2.25, 1e300, 3e-5});
    pop.step = 17;
    pop.bankruptcies = {0, 2, 0, 1};
    io::write_checkpoint(dir / "cp", pop, 99, "abc");
    const auto [wealth, meta] = io::read_checkpoint(dir / "cp");
    EXPECT_EQ(wealth, pop.wealth);
    EXPECT_EQ(meta.step, 17u);
    EXPECT_EQ(meta.seed, 99u);
    EXPECT_EQ(meta.config_hash, "abc");
    EXPECT_EQ(meta.bankruptcies, 3u);
    EXPECT_EQ(meta.n_agents, 4u);
    io::write_text(dir / "cp.csv", "wealth\n1\n");
    EXPECT_THROW(io::read_checkpoint(dir / "cp"), ParseError);
}

TEST(Svg, LogTicksAreDecades) {
    svg::Plot plot;
    plot.log_x = true;
    plot.log_y = true;
    plot.series.push_back({"s", {3e4, 2e9}, {0.5, 2e-6}, svg::palette(0), true});
    const auto text = svg::render(plot);
    EXPECT_NE(text.find("data-decade=\"4\""), std::string::npos);
    EXPECT_NE(text.find("data-decade=\"10\""), std::string::npos);
    EXPECT_NE(text.find("data-decade=\"-6\""), std::string::npos);
    EXPECT_EQ(text.find("data-decade=\"3\""), std::string::npos);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n') > 10, true);
    EXPECT_EQ(text.rfind("<svg", 0), 0u);
}
