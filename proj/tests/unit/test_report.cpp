#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fracdiff/report.hpp"

using namespace fracdiff;

namespace {

EstimateReport sample_report() {
    EstimateReport r;
    r.name = "smoothing";
    r.params = Params(0.5, 0.75, 1);
    r.inequality(0.8, 1.0, 1e-9);
    r.inequality(0.95, 1.0, 1e-9);
    r.metric("fitted_exponent", -0.9893);
    r.note("late window");
    return r;
}

}  // namespace

TEST(Report, InequalityKeepsTightestInstance) {
    const auto r = sample_report();
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.instances, 2);
    EXPECT_DOUBLE_EQ(r.lhs, 0.95);
    EXPECT_DOUBLE_EQ(r.tightness, 0.95);
    EstimateReport f;
    f.inequality(1.0, 0.5, 1e-6);
    EXPECT_FALSE(f.pass);
}

TEST(Report, JsonRoundTrip) {
    const auto r = sample_report();
    const auto back = report_from_json(to_json(r));
    EXPECT_EQ(back.name, r.name);
    EXPECT_DOUBLE_EQ(back.lhs, r.lhs);
    EXPECT_DOUBLE_EQ(back.params.s, 0.75);
    EXPECT_EQ(back.pass, r.pass);
    EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
}

TEST(Report, NonFiniteValuesSerialize) {
    EstimateReport r = sample_report();
    r.metric("nan", std::numeric_limits<double>::quiet_NaN());
    r.metric("inf", std::numeric_limits<double>::infinity());
    const std::string s = to_json(r).dump();
    EXPECT_NE(s.find("\"nan\""), std::string::npos);
    EXPECT_NE(s.find("\"inf\""), std::string::npos);
}

TEST(Report, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5})
        EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Report, CsvIsStable) {
    const auto r = sample_report();
    const std::string row = csv_row("run1", r);
    EXPECT_EQ(row, csv_row("run1", report_from_json(to_json(r))));
    EXPECT_EQ(row.back(), '\n');
    const auto commas = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    EXPECT_EQ(commas(row), commas(csv_header()));
    EXPECT_EQ(row.rfind("smoothing,0.95,1,", 0), 0u);
}

TEST(Report, SvgIsSelfContained) {
    PlotSpec p;
    p.title = "a < b & c";
    p.logx = p.logy = true;
    p.series.push_back({"u", "#1f77b4", {1, 10, 100}, {1, 0.1, 0.01}, false, true});
    p.series.push_back({"ref", "#d62728", {1, 100}, {2, 0.02}, true, false});
    p.vlines.push_back({5.0, "m1"});
    const std::string svg = render_svg(p);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_NE(svg.find("a &lt; b &amp; c"), std::string::npos);
    EXPECT_EQ(render_svg(p), svg);
}
