#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "spmtnet/curve.hpp"
#include "spmtnet/errors.hpp"
#include "spmtnet/io.hpp"
#include "spmtnet/params.hpp"
#include "spmtnet/profile.hpp"
#include "support.hpp"

using namespace spmtnet;

TEST_CASE("tabulated curve interpolates linearly and clamps outside the table")
{
    const TabulatedCurve c({0.0, 1.0, 3.0}, {1.0, 3.0, -1.0});
    CHECK(c(0.0) == 1.0);
    CHECK(c(0.5) == doctest::Approx(2.0));
    CHECK(c(2.0) == doctest::Approx(1.0));
    CHECK(c(3.0) == -1.0);
    CHECK(c(-5.0) == 1.0);
    CHECK(c(10.0) == -1.0);
}

TEST_CASE("tabulated curve rejects malformed tables")
{
    CHECK_THROWS_AS(TabulatedCurve({0.0}, {1.0}), FormatError);
    CHECK_THROWS_AS(TabulatedCurve({0.0, 1.0}, {1.0}), FormatError);
    CHECK_THROWS_AS(TabulatedCurve({0.0, 0.0}, {1.0, 2.0}), FormatError);
    CHECK_THROWS_AS(TabulatedCurve({1.0, 0.0}, {1.0, 2.0}), FormatError);
    CHECK_THROWS_AS(TabulatedCurve({0.0, std::nan("")}, {1.0, 2.0}), FormatError);
}

TEST_CASE("doubles round-trip through text exactly")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(2.0) == "2");
    CHECK_THROWS_AS(io::parse_double("1.5x"), FormatError);
    CHECK_THROWS_AS(io::parse_double(""), FormatError);
}

TEST_CASE("sha256 matches published test vectors")
{
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("atomic writes create parents and leave no temporary behind")
{
    support::TempDir dir;
    const auto target = dir / "a/b/c.txt";
    io::write_file_atomic(target, "hello\n");
    CHECK(io::read_file(target) == "hello\n");
    CHECK_FALSE(std::filesystem::exists(dir / "a/b/c.txt.tmp"));
    io::write_file_atomic(target, "again\n");
    CHECK(io::read_file(target) == "again\n");
    CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), FormatError);
}

TEST_CASE("split keeps empty fields")
{
    const auto f = io::split("a,,b,", ',');
    REQUIRE(f.size() == 4);
    CHECK(f[1].empty());
    CHECK(f[3].empty());
}

TEST_CASE("default parameter file loads and validates")
{
    const CellParameters& p = support::params();
    CHECK(p.alpha_a == 0.5);
    CHECK(p.alpha_c == 0.5);
    CHECK(p.V_min == 3.1);
    CHECK(p.V_max == 4.1);
    CHECK(p.solver.N_r == 20);
    CHECK(p.solver.dt == 1.0);
    CHECK(p.capacity_Ah() == doctest::Approx(2.3).epsilon(1e-6));
    CHECK(p.film_resistance() > 0.0);
}

TEST_CASE("parameter JSON round-trips and hashes stably")
{
    const CellParameters& p = support::params();
    const CellParameters q = parameters_from_json(to_json(p));
    CHECK(parameters_hash(q) == parameters_hash(p));
    CHECK(to_json(q).dump() == to_json(p).dump());

    CellParameters r = p;
    r.neg.D_s_ref *= 1.01;
    CHECK(parameters_hash(r) != parameters_hash(p));
}

TEST_CASE("invalid parameters are rejected")
{
    CellParameters p = support::params();
    SUBCASE("unequal transfer coefficients")
    {
        p.alpha_a = 0.4;
        p.alpha_c = 0.6;
    }
    SUBCASE("inverted voltage window")
    {
        p.V_min = 4.2;
    }
    SUBCASE("non-positive radius")
    {
        p.pos.R_s = 0.0;
    }
    SUBCASE("too few radial nodes")
    {
        p.solver.N_r = 2;
    }
    CHECK_THROWS_AS(p.validate(), FormatError);
}

TEST_CASE("missing parameter file is a format error")
{
    CHECK_THROWS_AS(load_parameters(support::data_dir() / "nope.json"), FormatError);
}

TEST_CASE("constant profiles carry c-rate times capacity")
{
    CHECK(make_constant_profile(1.0, 2.3, 10.0).at(0.0) == doctest::Approx(2.3));
    CHECK(make_constant_profile(0.1, 2.3, 10.0).at(5.0) == doctest::Approx(0.23));
    CHECK(make_constant_profile(10.0, 2.3, 10.0).at(9.5) == doctest::Approx(23.0));
    const CurrentProfile p = make_constant_profile(2.0, 2.3, 100.0);
    CHECK(p.duration() == 100.0);
    CHECK(p.spec.label == "CC-2C");
    CHECK(constant_label(0.5) == "CC-0.5C");
    CHECK_THROWS_AS(make_constant_profile(0.0, 2.3, 10.0), DomainError);
}

TEST_CASE("drive cycles are deterministic, distinct per seed and peak at 10C")
{
    const double cap = 2.3;
    for (DriveFamily f : {DriveFamily::udds, DriveFamily::us06}) {
        const CurrentProfile a = make_drive_cycle(5, f, cap, 1200.0);
        const CurrentProfile b = make_drive_cycle(5, f, cap, 1200.0);
        const CurrentProfile c = make_drive_cycle(6, f, cap, 1200.0);
        CHECK(a.current == b.current);
        CHECK(a.current != c.current);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const CurrentProfile p = make_drive_cycle(seed, f, cap, 1200.0);
            double peak = 0.0;
            for (double i : p.current) {
                CHECK(i >= 0.0);
                peak = std::max(peak, i);
            }
            CHECK(peak >= 9.9 * cap);
            CHECK(peak <= 10.0 * cap * (1.0 + 1e-12));
        }
    }
    CHECK_THROWS_AS(make_drive_cycle(1, DriveFamily::udds, cap, 599.0), DomainError);
}

TEST_CASE("udds-like cycles draw less mean current than us06-like cycles")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto mean = [](const CurrentProfile& p) {
            double s = 0.0;
            for (double i : p.current)
                s += std::abs(i);
            return s / static_cast<double>(p.current.size());
        };
        CHECK(mean(make_drive_cycle(seed, DriveFamily::udds, 2.3, 1200.0)) <
              mean(make_drive_cycle(seed, DriveFamily::us06, 2.3, 1200.0)));
    }
}

TEST_CASE("profile sampling holds each sample for one second")
{
    CurrentProfile p;
    p.current = {1.0, 2.0, 3.0};
    CHECK(p.at(0.0) == 1.0);
    CHECK(p.at(0.99) == 1.0);
    CHECK(p.at(1.0) == 2.0);
    CHECK(p.at(2.5) == 3.0);
    CHECK(p.at(7.0) == 3.0);
}
