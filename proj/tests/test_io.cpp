#include <gtest/gtest.h>

#include <sstream>

#include <corner_spectrum/config.hpp>
#include <corner_spectrum/io.hpp>
#include <corner_spectrum/svg.hpp>

using namespace corner;

namespace {

RadialFunction sample_function(double omega, int per_sector, int panels) {
    auto g = std::make_shared<const AngularGrid>(omega, per_sector, panels);
    return RadialFunction::sample(RadialGrid(-3.0, 2.0, 37), g, [](double t, double th, Sector s) {
        return cplx(std::exp(-t * t) * std::cos(3 * th), s == Sector::Plus ? 1e-300 * t : -t / 3.0);
    });
}

}  // namespace

TEST(Csv, RadialRoundTripIsByteIdentical) {
    for (auto [omega, n, p] : {std::tuple{pi / 2, 16, 4}, std::tuple{2.3, 24, 3}, std::tuple{0.1, 8, 2}}) {
        const auto v = sample_function(omega, n, p);
        std::ostringstream first;
        io::write_radial_csv(first, v);
        std::istringstream in(first.str());
        const auto back = io::read_radial_csv(in, omega, p);
        std::ostringstream second;
        io::write_radial_csv(second, back);
        EXPECT_EQ(first.str(), second.str());
        EXPECT_EQ((back.values() - v.values()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(back.t_grid().nodes, 37);
    }
}

TEST(Csv, HeaderAndRowCount) {
    const auto v = sample_function(pi / 2, 8, 2);
    std::ostringstream os;
    io::write_radial_csv(os, v);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "t,theta,value_re,value_im");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    EXPECT_EQ(rows, 37 * 16);
}

TEST(Csv, LineDataHeader) {
    const auto v = RadialFunction::sample(
        RadialGrid(-6.0, 6.0, 64), std::make_shared<const AngularGrid>(pi / 2, 8, 2),
        [](double t, double, Sector) { return cplx(std::exp(-t * t)); }, true);
    const auto d = mellin_forward(v, 0.0, LineGrid(4.0, 5));
    std::ostringstream os;
    io::write_line_csv(os, d);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "eta,theta,value_re,value_im");
    EXPECT_NE(os.str().find("\n-4,"), std::string::npos);
}

TEST(Csv, RejectsMalformedInput) {
    auto read = [](const std::string& s, double omega = pi / 2, int panels = 1) {
        std::istringstream is(s);
        return io::read_radial_csv(is, omega, panels);
    };
    EXPECT_THROW(read("x,y\n"), DomainError);
    EXPECT_THROW(read("t,theta,value_re,value_im\n"), DomainError);
    EXPECT_THROW(read("t,theta,value_re,value_im\n0,1,2\n"), DomainError);
    EXPECT_THROW(read("t,theta,value_re,value_im\n0,abc,2,3\n"), DomainError);
    const auto v = sample_function(pi / 2, 8, 2);
    std::ostringstream os;
    io::write_radial_csv(os, v);
    EXPECT_THROW(read(os.str(), 1.0, 2), DomainError);
    EXPECT_THROW(read(os.str(), pi / 2, 4), DomainError);
}

TEST(Config, DefaultsAndOverrides) {
    Settings s;
    EXPECT_EQ(s.grid_t, 4096);
    EXPECT_EQ(s.grid_eta, 4096);
    EXPECT_EQ(s.grid_theta, 64);
    EXPECT_EQ(s.t_min, -12.0);
    EXPECT_EQ(s.eta_max, 128.0);
    std::istringstream in("# comment\n grid_t = 512\neta_max=64.5\n\nradius_tolerance = 1e-7\n");
    s.load(in);
    EXPECT_EQ(s.grid_t, 512);
    EXPECT_EQ(s.eta_max, 64.5);
    EXPECT_EQ(s.radius_tolerance, 1e-7);
}

TEST(Config, RejectsBadLines) {
    Settings s;
    std::istringstream a("grid_t 512\n"), b("unknown = 1\n"), c("grid_t = 1.5\n"), d("t_min = x\n");
    EXPECT_THROW(s.load(a), DomainError);
    EXPECT_THROW(s.load(b), DomainError);
    EXPECT_THROW(s.load(c), DomainError);
    EXPECT_THROW(s.load(d), DomainError);
    EXPECT_THROW(s.load_file("/nonexistent/corner.cfg"), DomainError);
}

TEST(Svg, EmitsPathsAndBands) {
    svg::Plot plot("t <title>", "x", "y");
    plot.add({"a", "#000", {{0.0, 1.0}, {1.0, 2.0}, {2.0, std::nan("")}, {3.0, 0.5}}});
    plot.shade({0.5, 1.5, "band"});
    std::ostringstream os;
    plot.write(os);
    const auto s = os.str();
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    EXPECT_NE(s.find("&lt;title&gt;"), std::string::npos);
    EXPECT_NE(s.find("<path d=\"M"), std::string::npos);
    EXPECT_EQ(std::count(s.begin(), s.end(), 'M'), 2);
}
