#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "motional/config.hpp"
#include "motional/io.hpp"

using namespace motional;

namespace {

Wavefunction random_state(const SpatialGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<Complex> a(g.size());
    for (auto& x : a) x = {d(rng), d(rng)};
    return Wavefunction(g, std::move(a)).normalized();
}

std::size_t parse_error_line(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("motional_test_" + name);
    std::filesystem::remove_all(d);
    return d;
}

}  // namespace

TEST(WavefunctionIo, TextRoundTripIsBitExact) {
    const SpatialGrid g(-3.5, 4.25, 128);
    const auto psi = random_state(g, 5);
    const auto back = io::wavefunction_from_text(io::wavefunction_to_text(psi));
    EXPECT_EQ(back.grid().y_min(), g.y_min());
    EXPECT_EQ(back.grid().y_max(), g.y_max());
    ASSERT_EQ(back.size(), psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) EXPECT_EQ(back[j], psi[j]);
}

TEST(WavefunctionIo, BinaryRoundTripIsBitExact) {
    const auto psi = random_state(SpatialGrid(-4, 4, 128), 9);
    const auto back = io::wavefunction_from_binary(io::wavefunction_to_binary(psi));
    for (std::size_t j = 0; j < psi.size(); ++j) EXPECT_EQ(back[j], psi[j]);
    auto bytes = io::wavefunction_to_binary(psi);
    bytes[0] = 'X';
    EXPECT_THROW(io::wavefunction_from_binary(bytes), ParseError);
    EXPECT_THROW(io::wavefunction_from_binary(io::wavefunction_to_binary(psi).substr(0, 40)), ParseError);
}

TEST(WavefunctionIo, MalformedTextReportsLine) {
    const std::string text = "# grid -1 1 2\n# y re im\n-1 0.5 0\n0 abc 0\n";
    try {
        io::wavefunction_from_text(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    EXPECT_THROW(io::wavefunction_from_text(""), ParseError);
    EXPECT_THROW(io::wavefunction_from_text("# grid -1 1 3\n-1 1 0\n"), ParseError);
}

TEST(TrajectoryIo, BinaryAndSummary) {
    const SpatialGrid g(-4, 4, 64);
    std::vector<TrajectorySample> samples;
    for (int i = 0; i < 3; ++i) samples.push_back({0.05 * i, random_state(g, 20 + i)});
    const Trajectory t{samples, samples.back().state, 0.1};
    const auto back = io::trajectory_from_binary(io::trajectory_to_binary(t));
    ASSERT_EQ(back.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].time, t.samples[i].time);
        for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(back[i].state[j], t.samples[i].state[j]);
    }
    const std::vector<Wavefunction> raw{Wavefunction::gaussian(g, 0.3), Wavefunction::gaussian(g, 0.3, 0.0, 1.0)};
    const auto modes = lowdin_orthonormalize(raw).states;
    const auto csv = io::trajectory_summary_csv(t, modes);
    const auto lines = io::split(csv, '\n');
    EXPECT_EQ(lines[0], "time_ms,p0,p1,p2,leakage,mean_y_um,norm");
    EXPECT_EQ(io::split(lines[1], ',').size(), 7u);
}

TEST(FileIo, AtomicWriteCreatesDirectoriesAndLeavesNoTemp) {
    const auto dir = scratch_dir("atomic");
    const auto path = dir / "nested" / "out.txt";
    io::atomic_write(path, "first\n");
    io::atomic_write(path, "second\n");
    EXPECT_EQ(io::read_file(path), "second\n");
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(path.parent_path())) {
        (void)e;
        ++files;
    }
    EXPECT_EQ(files, 1u);
    EXPECT_THROW(io::read_file(dir / "missing.txt"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST(Format, ShortestRoundTrip) {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0}) EXPECT_EQ(io::parse_double(io::format_double(v)), v);
    EXPECT_THROW(io::parse_double("1.0x", 7), ParseError);
    EXPECT_THROW(io::parse_double("", 7), ParseError);
}

TEST(Config, DefaultsAndOverrides) {
    const auto d = parse_config("");
    EXPECT_EQ(d.grid.points, 1024u);
    EXPECT_EQ(d.potential.kind, "sextic");
    EXPECT_FALSE(d.gpe.g_n.has_value());
    EXPECT_EQ(d.seed, 1u);

    const auto c = parse_config(
        "seed = 42   # top level\n"
        "out_dir = results\n"
        "\n"
        "[grid]\n"
        "points = 256\n"
        "[potential]\n"
        "kind = harmonic\n"
        "frequency = 2.0\n"
        "[gpe]\n"
        "g_n = 0\n"
        "[ramsey]\n"
        "fit = false\n"
        "[two-mode]\n"
        "g1d = auto\n");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(c.out_dir, "results");
    EXPECT_EQ(c.grid.points, 256u);
    EXPECT_EQ(c.potential.kind, "harmonic");
    EXPECT_EQ(c.potential.frequency, 2.0);
    ASSERT_TRUE(c.gpe.g_n.has_value());
    EXPECT_EQ(*c.gpe.g_n, 0.0);
    EXPECT_FALSE(c.ramsey.fit);
    EXPECT_FALSE(c.two_mode.g1d.has_value());
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(parse_error_line("[grid]\npoints = 12x\n"), 2u);
    EXPECT_EQ(parse_error_line("seed = 1\n\n[nope]\n"), 3u);
    EXPECT_EQ(parse_error_line("[grid]\nwidth = 3\n"), 2u);
    EXPECT_EQ(parse_error_line("[grid]\npoints = 64\npoints = 128\n"), 3u);
    EXPECT_EQ(parse_error_line("[grid]\npoints =\n"), 2u);
    EXPECT_EQ(parse_error_line("[potential]\nkind = cubic\n"), 2u);
    EXPECT_EQ(parse_error_line("[ramsey]\nfit = maybe\n"), 2u);
    EXPECT_EQ(parse_error_line("just words\n"), 1u);
    EXPECT_EQ(parse_error_line("[grid\n"), 1u);
    EXPECT_EQ(parse_error_line("seed = -3\n"), 1u);
}
