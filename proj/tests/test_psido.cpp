#include "besovwf/error.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/psido.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace besovwf;
using std::numbers::pi;

namespace {

const GridSpec k2d{2, 512, 2 * pi};
const Point kCenter{pi, pi};
constexpr double kDeg = pi / 180.0;

Field band_limited(const GridSpec& spec, std::uint64_t seed)
{
    // Random coefficients with the Nyquist row removed, so every mode is a genuine frequency.
    auto U = transform(oracle::random_field(spec, seed));
    for (std::size_t i = 0; i < U.size(); ++i) {
        const std::size_t i0 = spec.dim == 2 ? i / spec.n : i;
        const std::size_t i1 = spec.dim == 2 ? i % spec.n : 0;
        if (i0 == spec.n / 2 || (spec.dim == 2 && i1 == spec.n / 2)) U[i] = 0.0;
    }
    return inverse(U);
}

double max_diff(const Field& a, const Field& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("localizer with full symbol is the identity")
{
    const GridSpec g{2, 64, 2 * pi};
    const auto u = band_limited(g, 7);
    SeparableSymbol sym;
    sym.chi_inner = 0.0;
    CHECK(max_diff(apply_localizer(sym, u), u) <= 1e-12 * u.sup_norm());
}

TEST_CASE("cutoffs")
{
    SeparableSymbol sym;
    sym.cone = ConeSpec{{1.0, 0.0}, 20 * kDeg};
    CHECK(dir_cutoff(sym, {3.0, 0.0}, 2) == doctest::Approx(1.0));
    CHECK(dir_cutoff(sym, {0.0, 3.0}, 2) == 0.0);
    CHECK(dir_cutoff(sym, {0.0, 0.0}, 2) == 0.0);
    CHECK(dir_cutoff(sym, {std::cos(19.9 * kDeg), std::sin(19.9 * kDeg)}, 2) < 1e-3);
    CHECK(dir_cutoff(sym, {-1.0, 0.0}, 1) == 0.0);
    CHECK(dir_cutoff(sym, {2.0, 0.0}, 1) == 1.0);
    CHECK(freq_cutoff(sym, 4.0) == 0.0);
    CHECK(freq_cutoff(sym, 8.0) == 1.0);
    const double mid = freq_cutoff(sym, 6.0);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    sym.window = Window{kCenter, 0.5, 4.0};
    CHECK(symbol_value(sym, {kCenter[0] + 0.6, kCenter[1]}, {20.0, 0.0}, k2d) == 0.0);
    CHECK(symbol_value(sym, kCenter, {20.0, 0.0}, k2d) == doctest::Approx(1.0));

    SeparableSymbol bad;
    bad.window = Window{kCenter, 0.0};
    CHECK_THROWS_AS(bad.validate(2), InvalidArgument);
}

TEST_CASE("localizer kills modes and conormals outside the cone")
{
    const GridSpec g{2, 128, 2 * pi};
    SeparableSymbol sym;
    sym.cone = ConeSpec{{1.0, 0.0}, 20 * kDeg};
    const auto wave = synthesize(synth::PlaneWave{{0, 5}}, g).field;
    CHECK(apply_localizer(sym, wave).sup_norm() <= 1e-10);
    const auto inside = synthesize(synth::PlaneWave{{9, 1}}, g).field;
    CHECK(max_diff(apply_localizer(sym, inside), inside * cplx(dir_cutoff(sym, {9.0, 1.0}, 2))) <= 1e-10);

    // The line delta's spectrum sits on the ξ₁ axis; a cone around (0,1) misses it.
    const auto line = synthesize(synth::LineDelta{0, pi}, k2d).field;
    SeparableSymbol up;
    up.cone = ConeSpec{{0.0, 1.0}, 20 * kDeg};
    CHECK(apply_localizer(up, line).sup_norm() <= 1e-10);

    up.window = Window{kCenter, 64 * k2d.spacing(), 4.0};
    const auto au = apply_localizer(up, line);
    CHECK(au.sup_norm() <= 1e-3 * line.sup_norm());
    SeparableSymbol across = up;
    across.cone = ConeSpec{{1.0, 0.0}, 20 * kDeg};
    CHECK(apply_localizer(across, line).sup_norm() > 0.1 * line.sup_norm());
}

TEST_CASE("characteristic and elliptic sets")
{
    SeparableSymbol full;
    CHECK(char_set(full, 2).empty());
    CHECK(char_set(modulus_multiplier(), 2).empty());
    CHECK(char_set(bracket_multiplier(-2), 2).empty());
    Multiplier flat{"flat", 0, [](Point) { return cplx(0.0); }, false};
    CHECK_FALSE(char_set(flat, 2).empty());

    SeparableSymbol sym;
    sym.window = Window{{1.0, 1.0}, 0.5, 4.0};
    sym.cone = ConeSpec{{1.0, 0.0}, 20 * kDeg};
    const auto ch = char_set(sym, 2);
    CHECK_FALSE(ch.empty());
    for (double a = 0.0; a < 2 * pi; a += 0.3) {
        const Point dir{std::cos(a), std::sin(a)};
        CHECK(ch.contains({3.0, 3.0}, dir, k2d));
        CHECK(ch.contains({1.6, 1.0}, dir, k2d));
    }
    CHECK_FALSE(ch.contains({1.0, 1.0}, {1.0, 0.0}, k2d));
    CHECK(ch.contains({1.0, 1.0}, {0.0, 1.0}, k2d));
    const auto ell = elliptic_set(sym, 2);
    CHECK(ell.contains({1.2, 1.1}, {1.0, 0.1}, k2d));
    CHECK_FALSE(ell.contains({1.2, 1.1}, {0.0, 1.0}, k2d));
    // The boundary band belongs to both.
    const Point rim{std::cos(20 * kDeg), std::sin(20 * kDeg)};
    CHECK(ch.contains({1.0, 1.0}, rim, k2d));
    CHECK(ell.contains({1.0, 1.0}, rim, k2d));
}

TEST_CASE("essential support of a product lies in the intersection")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0.0, 2 * pi), ang(-pi, pi), width(0.3, 1.5), half(0.1, 1.2),
        jitter(-1.0, 1.0);
    const GridSpec g{2, 64, 2 * pi};
    int hits = 0;
    for (int trial = 0; trial < 50; ++trial) {
        SeparableSymbol a, b;
        a.window = Window{{pos(rng), pos(rng)}, width(rng), 4.0};
        b.window = Window{{a.window->center[0] + jitter(rng), a.window->center[1] + jitter(rng)}, width(rng), 4.0};
        const double t0 = ang(rng);
        a.cone = ConeSpec::at_angle(t0, half(rng));
        b.cone = ConeSpec::at_angle(t0 + jitter(rng), half(rng));
        const auto both = intersect(ess_supp(a, 2), ess_supp(b, 2));
        for (int s = 0; s < 400; ++s) {
            const Point x{a.window->center[0] + 1.5 * jitter(rng), a.window->center[1] + 1.5 * jitter(rng)};
            const double t = t0 + 1.5 * jitter(rng), r = 20.0;
            const Point xi{r * std::cos(t), r * std::sin(t)};
            if (symbol_value(a, x, xi, g) * symbol_value(b, x, xi, g) == 0.0) continue;
            ++hits;
            CHECK(both.contains(x, {std::cos(t), std::sin(t)}, g));
        }
    }
    CHECK(hits > 100);
}

TEST_CASE("symbol bounds")
{
    for (double ha : {0.15, 0.35, 0.8}) {
        SeparableSymbol sym;
        sym.cone = ConeSpec::at_angle(0.3, ha);
        const auto rep = symbol_bound_check(sym, k2d);
        CHECK(rep.ok());
    }
    SeparableSymbol chi_only;
    CHECK(symbol_bound_check(chi_only, k2d).ok());
}

TEST_CASE("microlocality")
{
    SeparableSymbol sym;
    sym.window = Window{kCenter, 32 * k2d.spacing(), 4.0};
    sym.cone = ConeSpec{{1.0, 0.0}, 20 * kDeg};
    const std::vector<Point> pts{kCenter, {kCenter[0] + 0.1, kCenter[1]}};
    ScanConfig sc;

    const auto delta = microlocality_check(sym, synthesize(synth::Delta{kCenter}, k2d).field, pts, -1.0, sc);
    CHECK(delta.ok());
    // IN directions of Au only along the cone axis.
    for (std::size_t d = 0; d < delta.au_scan.directions.size(); ++d) {
        const bool in = classify(delta.au_scan.at(0, d), -1.0) == Classification::In;
        const double gap = std::abs(std::remainder(delta.au_scan.directions[d].angle(), 2 * pi));
        if (in) CHECK(gap <= 20 * kDeg + pi / 4);
    }
    CHECK(classify(delta.au_scan.at(0, 0), -1.0) == Classification::In);

    const auto smooth = microlocality_check(sym, synthesize(synth::Gaussian{kCenter, 0.3}, k2d).field, pts, -1.0, sc);
    CHECK(smooth.ok());
    for (const auto& e : smooth.au_scan.entries) CHECK(classify(e, -1.0) == Classification::Out);

    SeparableSymbol up = sym;
    up.cone = ConeSpec{{0.0, 1.0}, 20 * kDeg};
    const auto line = microlocality_check(up, synthesize(synth::LineDelta{0, pi}, k2d).field, pts, -1.0, sc);
    CHECK(line.ok());
    for (const auto& e : line.au_scan.entries) CHECK(classify(e, -1.0) == Classification::Out);
}

TEST_CASE("pseudodifferential characterization crosscheck")
{
    const auto cone = ConeSpec{{1.0, 0.0}, 20 * kDeg};
    const auto delta = characterization_crosscheck(synthesize(synth::Delta{kCenter}, k2d).field, kCenter, cone, {-1.0});
    REQUIRE(delta.probes.size() == 6);
    for (const auto& p : delta.probes) CHECK(p.fit.slope == doctest::Approx(-2.0).epsilon(0.1));
    CHECK(delta.entries[0].detector == Classification::In);
    CHECK(delta.entries[0].localizer == Classification::In);

    const auto sq = characterization_crosscheck(synthesize(synth::RadialQuarterPower{kCenter}, k2d).field, kCenter,
                                                ConeSpec::at_angle(pi / 2, 20 * kDeg), {0.3});
    CHECK(sq.entries[0].detector == Classification::Out);
    CHECK(sq.entries[0].localizer == Classification::Out);

    const auto g = characterization_crosscheck(synthesize(synth::Gaussian{kCenter, 0.3}, k2d).field, {2.0, 4.0}, cone,
                                               {2.0});
    for (const auto& p : g.probes) CHECK(p.fit.slope >= 2.0);
    CHECK_FALSE(g.entries[0].disagree());
}

TEST_CASE("elliptic regularity")
{
    const auto u = synthesize(synth::Delta{kCenter}, k2d).field;
    const auto fan = direction_fan(2, 4, 20 * kDeg);
    const auto up = elliptic_regularity_check(bracket_multiplier(1), u, {kCenter}, fan);
    CHECK(up.ok());
    for (const auto& e : up.entries) CHECK(*e.after == doctest::Approx(-3.0).epsilon(0.1));
    CHECK(elliptic_regularity_check(bracket_multiplier(0), u, {kCenter}, fan).ok());

    // ⟨ξ⟩⁻²δ is a logarithm: its singular part is weak against the smooth bulk, which
    // leaks into the 16-cell window, so this case uses the large window alone.
    DetectorConfig wide;
    wide.windows = {{6.0, true}, {k2d.n / 8.0, false}};
    const auto down = elliptic_regularity_check(bracket_multiplier(-2), u, {kCenter}, fan, wide);
    CHECK(down.ok());
    for (const auto& e : down.entries) CHECK(std::abs(*e.after) <= 0.3);
}

TEST_CASE("boundedness across a corpus")
{
    const GridSpec g{2, 128, 2 * pi};
    std::vector<Field> corpus;
    corpus.push_back(synthesize(synth::Delta{kCenter}, g).field);
    corpus.push_back(synthesize(synth::DeltaDerivative{kCenter, 0}, g).field);
    corpus.push_back(synthesize(synth::DeltaDerivative{kCenter, 1}, g).field);
    corpus.push_back(synthesize(synth::RadialQuarterPower{kCenter}, g).field);
    corpus.push_back(synthesize(synth::Gaussian{kCenter, 0.3}, g).field);
    corpus.push_back(synthesize(synth::Gaussian{{2.0, 4.0}, 0.1}, g).field);
    corpus.push_back(synthesize(synth::LineDelta{0, pi}, g).field);
    corpus.push_back(synthesize(synth::LineDelta{1, 2.0}, g).field);
    corpus.push_back(synthesize(synth::PlaneWave{{3, -5}}, g).field);
    corpus.push_back(synthesize(synth::Weierstrass{0.5, 3}, g).field);
    for (const auto& a : {bracket_multiplier(1), bracket_multiplier(-2), modulus_multiplier()}) {
        const auto rep = boundedness_check(a, corpus, -3.0);
        CHECK(rep.ratios.size() == corpus.size());
        CHECK(rep.ok());
    }
    const auto id = boundedness_check(bracket_multiplier(0), corpus, -3.0);
    for (double r : id.ratios) CHECK(r == doctest::Approx(1.0));
}
