#include <doctest.h>

#include <cmath>
#include <random>

#include "spmtnet/errors.hpp"
#include "spmtnet/eval.hpp"
#include "spmtnet/io.hpp"
#include "support.hpp"

using namespace spmtnet;
using namespace spmtnet::eval;

namespace {

hybrid::HybridModel zero_model()
{
    hybrid::HybridModel m;
    m.spmt_params = support::params();
    const std::vector<int> widths{5, 4, 1};
    m.fnn = fnn::make_model(widths, 1);
    for (fnn::Layer& l : m.fnn.layers) {
        l.W.setZero();
        l.b.setZero();
    }
    return m;
}

ProfileSpec cc(double rate, double t_end)
{
    ProfileSpec p;
    p.kind = ProfileKind::constant;
    p.c_rate = rate;
    p.label = constant_label(rate);
    p.t_end = t_end;
    return p;
}

std::vector<truth::Dataset> small_matrix()
{
    truth::TruthParameters tp;
    tp.base = support::params();
    std::vector<truth::Dataset> sets;
    for (double rate : {1.0, 5.0})
        for (double soc0 : {0.46, 0.7})
            sets.push_back(truth::build_dataset(tp, support::params(), cc(rate, 300.0), soc0, 298.15, "test"));
    return sets;
}

} // namespace

TEST_CASE("rmse examples in millivolts")
{
    const std::vector<double> a{3.7, 3.8, 3.9};
    CHECK(rmse_mv(a, a) == 0.0);
    const std::vector<double> b{3.705, 3.805, 3.905};
    CHECK(rmse_mv(a, b) == doctest::Approx(5.0));
    const std::vector<double> c{3.7, 3.8};
    const std::vector<double> d{3.705, 3.8};
    CHECK(rmse_mv(c, d) == doctest::Approx(3.5355339));
    CHECK_THROWS_AS(rmse_mv(a, c), DimensionError);
    CHECK_THROWS_AS(rmse_mv({}, {}), DimensionError);
}

TEST_CASE("relative error reduction examples")
{
    CHECK(*rer(60.0, 7.975) == doctest::Approx(86.7083).epsilon(1e-4));
    CHECK(*rer(10.0, 14.057) == doctest::Approx(-40.57).epsilon(1e-4));
    CHECK(*rer(3.2, 3.2) == 0.0);
    CHECK_FALSE(rer(0.0, 1.0).has_value());
}

TEST_CASE("relative error reduction follows its definition and is scale invariant")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(1e-3, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = u(rng), k = u(rng);
        const double r = *rer(a, b);
        CHECK(r == doctest::Approx(100.0 * (1.0 - b / a)));
        CHECK(r <= 100.0);
        CHECK(*rer(k * a, k * b) == doctest::Approx(r));
    }
}

TEST_CASE("rmse is scale equivariant and symmetric")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(3.7, 0.1);
    std::vector<double> a(200), b(200), a2(200), b2(200);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = n(rng);
        b[i] = n(rng);
        a2[i] = 3.0 * a[i];
        b2[i] = 3.0 * b[i];
    }
    CHECK(rmse_mv(a, b) == doctest::Approx(rmse_mv(b, a)));
    CHECK(rmse_mv(a2, b2) == doctest::Approx(3.0 * rmse_mv(a, b)));
}

TEST_CASE("a zero-output residual model scores zero reduction everywhere")
{
    const auto sets = small_matrix();
    const MatrixResult r = run_matrix(zero_model(), sets, "test", "hybrid-1");
    REQUIRE(r.report.rows.size() == 4);
    REQUIRE(r.report.pooled.size() == 2);
    for (const auto* rows : {&r.report.rows, &r.report.pooled})
        for (const EvalRow& row : *rows) {
            REQUIRE(row.ok());
            CHECK(row.rmse_hybrid == row.rmse_spmt);
            REQUIRE(row.rer);
            CHECK(*row.rer == 0.0);
        }
    CHECK(r.report.column == "HYBRID-I");
    REQUIRE(r.report.mean_high_c_rer);
    CHECK(*r.report.mean_high_c_rer == 0.0);
}

TEST_CASE("pooled rows combine squared errors over soc0")
{
    const auto sets = small_matrix();
    const MatrixResult r = run_matrix(zero_model(), sets, "test", "hybrid-1");
    const EvalRow* pooled = r.report.find_pooled("CC-5C");
    REQUIRE(pooled);
    double sq = 0.0;
    std::size_t n = 0;
    for (const EvalRow& row : r.report.rows)
        if (row.profile == "CC-5C") {
            sq += row.rmse_spmt * row.rmse_spmt * static_cast<double>(row.samples);
            n += row.samples;
        }
    CHECK(pooled->samples == n);
    CHECK(pooled->rmse_spmt == doctest::Approx(std::sqrt(sq / static_cast<double>(n))));
    CHECK_FALSE(pooled->soc0.has_value());
}

TEST_CASE("stored truth is scored independently of the model run")
{
    const auto sets = small_matrix();
    const MatrixResult r = run_matrix(zero_model(), sets, "test", "hybrid-1");
    for (std::size_t i = 0; i < sets.size(); ++i) {
        std::vector<double> vt, vs;
        for (const truth::Record& rec : sets[i].records) {
            vt.push_back(rec.V_true);
            vs.push_back(rec.V_spmt);
        }
        const EvalRow& row = r.report.rows[i];
        CHECK(row.samples == vt.size());
        CHECK(row.rmse_spmt == doctest::Approx(rmse_mv(vt, vs)).epsilon(1e-12));
    }
}

TEST_CASE("failing cells become row-level errors")
{
    auto sets = small_matrix();
    sets[1].records.clear();
    const MatrixResult r = run_matrix(zero_model(), sets, "test", "hybrid-1");
    CHECK(r.report.rows[0].ok());
    CHECK_FALSE(r.report.rows[1].ok());
    CHECK(r.report.rows[2].ok());
    CHECK_FALSE(r.report.all_failed());
    CHECK(report_csv(r.report).find("error") != std::string::npos);
}

TEST_CASE("reports are identical across thread counts and repeat runs")
{
    const auto sets = small_matrix();
    const std::string one = report_csv(run_matrix(zero_model(), sets, "test", "hybrid-1", 1).report);
    const std::string again = report_csv(run_matrix(zero_model(), sets, "test", "hybrid-1", 1).report);
    const std::string three = report_csv(run_matrix(zero_model(), sets, "test", "hybrid-1", 3).report);
    CHECK(one == again);
    CHECK(one == three);
    CHECK(one.rfind("profile,soc0,samples,rmse_spmt_mV,rmse_hybrid_mV,rer_pct,status\n", 0) == 0);
    CHECK(one.find("# model=hybrid-1 split=test") != std::string::npos);
}

TEST_CASE("plot series align the three voltage traces")
{
    const auto sets = small_matrix();
    const MatrixResult r = run_matrix(zero_model(), sets, "test", "hybrid-1");
    REQUIRE(r.plots.size() == sets.size());
    const PlotSeries& p = r.plots[0];
    REQUIRE(!p.t.empty());
    CHECK(p.V_true.size() == p.t.size());
    CHECK(p.V_hybrid == p.V_spmt);
    const std::string csv = plot_csv(p);
    CHECK(csv.rfind("t,V_true,V_spmt,V_hybrid\n", 0) == 0);
    const auto lines = io::split(csv, '\n');
    CHECK(lines.size() == p.t.size() + 2);
}

TEST_CASE("high-rate classification")
{
    CHECK(is_high_c(cc(3.0, 10.0)));
    CHECK(is_high_c(cc(10.0, 10.0)));
    CHECK_FALSE(is_high_c(cc(1.0, 10.0)));
    ProfileSpec drive;
    drive.kind = ProfileKind::drive_cycle;
    CHECK_FALSE(is_high_c(drive));
}

TEST_CASE("text table lists every pooled profile")
{
    const auto sets = small_matrix();
    const MatrixResult r = run_matrix(zero_model(), sets, "test", "hybrid-1");
    const std::string t = report_table(r.report);
    CHECK(t.find("CC-1C") != std::string::npos);
    CHECK(t.find("CC-5C") != std::string::npos);
    CHECK(t.find("HYBRID-I") != std::string::npos);
}
