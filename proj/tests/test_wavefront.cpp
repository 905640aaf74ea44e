#include "besovwf/error.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/wavefront.hpp"

#include <doctest.h>

using namespace besovwf;
using std::numbers::pi;

namespace {

const GridSpec k2d{2, 512, 2 * pi};
const Point kCenter{pi, pi};

std::vector<double> slopes(const std::vector<DirectionalFit>& fits)
{
    std::vector<double> out;
    for (const auto& f : fits) {
        REQUIRE(f.has_verdict);
        out.push_back(f.fit.slope);
    }
    return out;
}

Point shifted(Point p, double cells0, double cells1, const GridSpec& spec)
{
    return {p[0] + cells0 * spec.spacing(), p[1] + cells1 * spec.spacing()};
}

}  // namespace

TEST_CASE("cone membership and fans")
{
    const auto c = ConeSpec::at_angle(pi / 4, 0.2);
    CHECK(c.contains({1.0, 1.0}, 2));
    CHECK(c.contains({1.0, 1.2}, 2));
    CHECK_FALSE(c.contains({1.0, 0.0}, 2));
    CHECK_FALSE(c.contains({0.0, 0.0}, 2));
    CHECK_FALSE(c.contains({-1.0, -1.0}, 2));
    const ConeSpec left{{-1.0, 0.0}, 0.3};
    CHECK(left.contains({-2.0, 0.0}, 1));
    CHECK_FALSE(left.contains({2.0, 0.0}, 1));
    CHECK_THROWS_AS((ConeSpec{{1.0, 1.0}, 0.2}.validate()), InvalidArgument);
    CHECK_THROWS_AS((ConeSpec{{1.0, 0.0}, 2.0}.validate()), InvalidArgument);

    const auto fan = direction_fan(2, 8, 0.3);
    REQUIRE(fan.size() == 8);
    CHECK(fan[2].direction[1] == doctest::Approx(1.0));
    CHECK(direction_fan(1, 8, 0.3).size() == 2);
    CHECK_THROWS_AS(direction_fan(2, 3, 0.3), InvalidArgument);
}

TEST_CASE("classification rule")
{
    DirectionalFit f;
    f.has_verdict = true;
    f.fit.slope = 0.5;
    CHECK(classify(f, 0.3) == Classification::Out);
    CHECK(classify(f, 0.7) == Classification::In);
    CHECK(classify(f, 0.5) == Classification::Undecided);
    f.zero_order_bounded = false;
    CHECK(classify(f, 0.2) == Classification::In);
    CHECK(classify(f, -0.5) == Classification::Out);
    f.has_verdict = false;
    CHECK(classify(f, 5.0) == Classification::Undecided);
    CHECK(to_string(Classification::Undecided) == "UNDECIDED");
}

TEST_CASE("window profile")
{
    const Window w{{1.0, 1.0}, 0.5, 4.0};
    const GridSpec spec{2, 64, 2 * pi};
    CHECK(w({1.0, 1.0}, spec) == doctest::Approx(1.0));
    CHECK(w({1.0, 1.3}, spec) >= 0.0);
    CHECK(w({1.0, 1.3}, spec) < 1.0);
    CHECK(w({1.6, 1.0}, spec) == 0.0);
    // Periodic minimal image.
    const Window edge{{0.1, 0.1}, 0.5, 4.0};
    CHECK(edge({2 * pi - 0.1, 0.1}, spec) > 0.0);
}

TEST_CASE("delta: threshold -d at the center, capped away from it")
{
    const auto u = synthesize(synth::Delta{kCenter}, k2d).field;
    const Detector det(u);
    for (double s : slopes(det.test_point(kCenter, direction_fan(2, 8, det.config().half_angle)))) {
        CHECK(s >= -2.2);
        CHECK(s <= -1.8);
    }
    for (Point p : {shifted(kCenter, 8, 0, k2d), shifted(kCenter, -6, 6, k2d), shifted(kCenter, 0, 30, k2d)}) {
        const auto f = det.test(p, ConeSpec::at_angle(0.3));
        CHECK(f.fit.capped);
        for (double a : {-1.0, 0.0, 2.0, 3.8}) CHECK(classify(f, a) == Classification::Out);
    }

    const GridSpec g1{1, 1024, 2 * pi};
    const auto d1 = synthesize(synth::Delta{{pi, 0}}, g1).field;
    for (const auto& c : direction_fan(1, 2, 0.3)) CHECK(threshold_estimate(d1, {pi, 0}, c) == doctest::Approx(-1.0).epsilon(0.2));
}

TEST_CASE("delta derivative and compact order bounds")
{
    const auto u = synthesize(synth::DeltaDerivative{kCenter, 1}, k2d).field;
    for (double s : slopes(Detector(u).test_point(kCenter, direction_fan(2, 8, 20 * pi / 180)))) {
        CHECK(s >= -3.25);
        CHECK(s <= -2.75);
    }
    ScanConfig cfg;
    const std::vector<Point> pts{kCenter, shifted(kCenter, 3, 0, k2d), shifted(kCenter, 12, -12, k2d)};
    CHECK(compact_order_bound_check(u, 1, pts, cfg));
    CHECK(compact_order_bound_check(synthesize(synth::Delta{kCenter}, k2d).field, 0, pts, cfg));
    CHECK(compact_order_bound_check(synthesize(synth::Gaussian{kCenter, 0.3}, k2d).field, 0, pts, cfg));
    // The bound is sharp: ∂δ violates the M = 0 bound.
    CHECK_FALSE(compact_order_bound_check(u, 0, {kCenter}, cfg));
}

TEST_CASE("radial quarter power: threshold 1/2 in every direction")
{
    const auto u = synthesize(synth::RadialQuarterPower{kCenter}, k2d).field;
    ScanConfig cfg;
    cfg.alphas = {0.3, 0.7};
    const auto scan = wf_scan(u, {kCenter}, cfg);
    for (const auto& e : scan.entries) {
        CHECK(e.fit.slope >= 0.35);
        CHECK(e.fit.slope <= 0.65);
        CHECK(e.zero_order_bounded == true);
        CHECK(classify(e, 0.3) == Classification::Out);
        CHECK(classify(e, 0.7) == Classification::In);
    }
    // Monotone IN sets in α.
    const std::vector<double> levels{-1.0, 0.0, 0.3, 0.5, 0.7, 1.0, 2.0};
    for (const auto& e : scan.entries)
        for (std::size_t i = 0; i + 1 < levels.size(); ++i)
            if (classify(e, levels[i]) == Classification::In) CHECK(classify(e, levels[i + 1]) == Classification::In);
    const auto csv = scan_csv(scan, cfg.alphas);
    CHECK(csv.rfind("i0,i1,dir_angle,slope,r2,zero_order_bounded,class_alpha_0.3,class_alpha_0.7\n", 0) == 0);
    CHECK(csv.find("256,256,0,") != std::string::npos);
}

TEST_CASE("line delta is anisotropic and direction sets are fan-stable")
{
    const auto u = synthesize(synth::LineDelta{0, pi}, k2d).field;
    const Detector det(u);
    const auto coarse = det.test_point(kCenter, direction_fan(2, 8, 20 * pi / 180));
    CHECK(coarse[0].fit.slope == doctest::Approx(-1.0).epsilon(0.2));
    CHECK(coarse[4].fit.slope == doctest::Approx(-1.0).epsilon(0.2));
    CHECK(coarse[2].fit.capped);
    CHECK(coarse[6].fit.capped);

    const auto fine = det.test_point(kCenter, direction_fan(2, 16, 10 * pi / 180));
    auto in_angles = [](const std::vector<DirectionalFit>& fits) {
        std::vector<double> a;
        for (const auto& f : fits)
            if (classify(f, 0.0) == Classification::In) a.push_back(f.cone.angle());
        return a;
    };
    const auto a8 = in_angles(coarse), a16 = in_angles(fine);
    REQUIRE_FALSE(a8.empty());
    auto near = [](double x, const std::vector<double>& set, double tol) {
        for (double y : set)
            if (std::abs(std::remainder(x - y, 2 * pi)) <= tol + 1e-9) return true;
        return false;
    };
    for (double a : a16) CHECK(near(a, a8, pi / 4));
    for (double a : a8) CHECK(near(a, a16, pi / 4));
}

TEST_CASE("smooth fields are OUT everywhere")
{
    ScanConfig cfg;
    cfg.alphas = {3.0};
    const auto u = synthesize(synth::Gaussian{kCenter, 0.3}, k2d).field;
    const auto scan = wf_scan(u, {kCenter, {1.0, 2.0}}, cfg);
    for (const auto& e : scan.entries) CHECK(classify(e, 3.0) == Classification::Out);
}

TEST_CASE("weierstrass threshold in 1D")
{
    const GridSpec g{1, 4096, 2 * pi};
    const auto u = synthesize(synth::Weierstrass{0.6, 1}, g).field;
    const Detector det(u);
    for (double x : {0.5, 2.0, 4.0})
        for (const auto& f : det.test_point({x, 0}, direction_fan(1, 2, 0.3))) {
            REQUIRE(f.has_verdict);
            CHECK(f.fit.slope == doctest::Approx(0.6).epsilon(0.15 / 0.6));
        }
}

TEST_CASE("sum rule")
{
    const GridSpec g = k2d;
    // Lattice-centered deltas are exact Kronecker samples, hence local.
    const Point a = shifted(kCenter, -64, -64, g), b = shifted(kCenter, 64, 64, g);
    ScanConfig cfg;
    cfg.alphas = {-1.0};
    const auto rep = wf_union_check(synthesize(synth::Delta{a}, g).field, synthesize(synth::Delta{b}, g).field,
                                    {a, b, kCenter}, cfg);
    CHECK(rep.ok());
    for (std::size_t d = 0; d < rep.sum.directions.size(); ++d) {
        CHECK(classify(rep.sum.at(0, d), -1.0) == Classification::In);
        CHECK(classify(rep.sum.at(1, d), -1.0) == Classification::In);
        CHECK(classify(rep.sum.at(2, d), -1.0) == Classification::Out);
    }

    const auto w = synthesize(synth::RadialQuarterPower{kCenter}, g).field;
    const auto cancel = wf_union_check(w, w * cplx(-1.0), {kCenter}, cfg);
    for (const auto& e : cancel.sum.entries) CHECK(e.fit.capped);

    const GridSpec g1{1, 4096, 2 * pi};
    const auto weier = synthesize(synth::Weierstrass{0.4, 2}, g1).field;
    const auto smooth = synthesize(synth::Gaussian{{pi, 0}, 0.3}, g1).field;
    ScanConfig c1;
    c1.alphas = {0.0, 0.4, 1.0};
    const auto mix = wf_union_check(weier, smooth, {{1.0, 0}, {pi, 0}}, c1);
    CHECK(mix.ok());
    for (std::size_t i = 0; i < mix.sum.entries.size(); ++i)
        CHECK(mix.sum.entries[i].fit.slope == doctest::Approx(mix.u.entries[i].fit.slope).epsilon(0.15 / 0.4));
}

TEST_CASE("locality off the singular support")
{
    // The smallest verdict window has radius N/32 = 16 cells, so points farther
    // than that from the singular point are OUT at every level. The samples of
    // the band-limited derivative are nonzero along the lattice row through the
    // center (a ridge in the transverse direction), so the probes avoid that row.
    const auto u = synthesize(synth::DeltaDerivative{kCenter, 0}, k2d).field;
    const auto det = Detector(u, DetectorConfig{.zero_order = true});
    for (Point p : {shifted(kCenter, -24, 12, k2d), shifted(kCenter, 0, -20, k2d), shifted(kCenter, 40, 40, k2d)})
        for (const auto& f : det.test_point(p, direction_fan(2, 4, 0.35)))
            for (double a : {-3.0, 0.0, 2.0, 4.0}) CHECK(classify(f, a) == Classification::Out);
}

TEST_CASE("empty wavefront set matches a finite, resolution-stable local norm")
{
    ScanConfig cfg;
    cfg.alphas = {0.3};
    cfg.fan = 4;
    const auto scan = wf_scan(synthesize(synth::RadialQuarterPower{kCenter}, k2d).field, {kCenter}, cfg);
    for (const auto& e : scan.entries) REQUIRE(classify(e, 0.3) == Classification::Out);
    std::vector<double> norms;
    for (std::size_t n : {256, 512}) {
        const GridSpec g{2, n, 2 * pi};
        const auto u = synthesize(synth::RadialQuarterPower{kCenter}, g).field;
        const Window phi{kCenter, 0.5, 4.0};
        Field windowed = u;
        for (std::size_t i = 0; i < u.size(); ++i) windowed[i] *= phi(u.position(i), g);
        norms.push_back(local_means_norm(windowed, 0.3, default_ladder(g, make_kernel(0, 2))));
    }
    CHECK(std::isfinite(norms[0]));
    CHECK(norms[1] / norms[0] <= 2.0);
    CHECK(norms[0] / norms[1] <= 2.0);
}

TEST_CASE("single-window primitive and sampling errors")
{
    const auto u = synthesize(synth::Delta{kCenter}, GridSpec{2, 256, 2 * pi}).field;
    const auto k = make_kernel(3, 2);
    LambdaLadder ladder;
    for (int i = 4; i <= 10; ++i) ladder.values.push_back(std::exp2(-i / 4.0));
    const auto f = cone_scaling_test(u, Window{kCenter, 0.4, 4.0}, ConeSpec::at_angle(0.0), k, ladder);
    REQUIRE(f.has_verdict);
    CHECK(f.fit.slope == doctest::Approx(-2.0).epsilon(0.1));

    const auto tiny = synthesize(synth::Delta{{pi, pi}}, GridSpec{2, 16, 2 * pi}).field;
    CHECK_THROWS_AS(cone_scaling_test(tiny, Window{kCenter, 1.0, 4.0}, ConeSpec::at_angle(0.0, 0.05), make_kernel(1, 2),
                                      LambdaLadder{{0.9, 0.8, 0.7, 0.6}}),
                    NumericalError);
}
