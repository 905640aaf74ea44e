#include "besovwf/psido.hpp"

#include "besovwf/error.hpp"
#include "besovwf/localmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace besovwf {

using std::numbers::pi;

namespace {

double periodic_distance(Point a, Point b, const GridSpec& spec)
{
    double r2 = 0.0;
    for (int i = 0; i < spec.dim; ++i) {
        const double d = std::remainder(a[i] - b[i], spec.length);
        r2 += d * d;
    }
    return std::sqrt(r2);
}

double angle_between(Point a, Point b)
{
    const double c = (a[0] * b[0] + a[1] * b[1]) / (std::hypot(a[0], a[1]) * std::hypot(b[0], b[1]));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

// Angular distance on the circle, or 0/π on S⁰ in 1D.
double direction_gap(Point dir, const ConeSpec& cone, int dim)
{
    if (dim == 1) return (dir[0] > 0.0) == (cone.direction[0] > 0.0) ? 0.0 : pi;
    return angle_between(dir, cone.direction);
}

double wrap_angle(double a)
{
    return std::remainder(a, 2.0 * pi);
}

}  // namespace

void SeparableSymbol::validate(int dim) const
{
    if (window && !(window->width > 0.0)) throw InvalidArgument("symbol: window width must be positive");
    if (cone && dim == 2) cone->validate();
    if (!(chi_inner >= 0.0)) throw InvalidArgument("symbol: chi_inner must be non-negative");
    if (!(dir_sharpness > 0.0)) throw InvalidArgument("symbol: dir_sharpness must be positive");
}

double dir_cutoff(const SeparableSymbol& sym, Point xi, int dim)
{
    if (!sym.cone) return 1.0;
    if (dim == 1) return xi[0] != 0.0 && (xi[0] > 0.0) == (sym.cone->direction[0] > 0.0) ? 1.0 : 0.0;
    if (xi[0] == 0.0 && xi[1] == 0.0) return 0.0;
    const double t = angle_between(xi, sym.cone->direction) / sym.cone->half_angle;
    if (t >= 1.0) return 0.0;
    const double p = sym.dir_sharpness;
    return std::exp(p - p / (1.0 - t * t));
}

double freq_cutoff(const SeparableSymbol& sym, double modulus)
{
    if (sym.chi_inner <= 0.0) return 1.0;
    return 1.0 - lp_cutoff(modulus / sym.chi_inner);
}

double symbol_value(const SeparableSymbol& sym, Point x, Point xi, const GridSpec& spec)
{
    const double phi = sym.window ? (*sym.window)(x, spec) : 1.0;
    return phi * dir_cutoff(sym, xi, spec.dim) * freq_cutoff(sym, std::hypot(xi[0], xi[1]));
}

Field apply_localizer(const SeparableSymbol& sym, const Field& u)
{
    const auto& spec = u.spec();
    sym.validate(spec.dim);
    Field windowed = u;
    Vec phi;
    if (sym.window) {
        phi.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            phi[i] = (*sym.window)(u.position(i), spec);
            windowed[i] *= phi[i];
        }
    }
    const FrequencyLattice lat(spec);
    std::vector<cplx> m(u.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Point k{static_cast<double>(lat.k[i][0]), static_cast<double>(lat.k[i][1])};
        m[i] = dir_cutoff(sym, k, spec.dim) * freq_cutoff(sym, std::hypot(k[0], k[1]));
    }
    Field out = apply_multiplier(windowed, m);
    if (sym.window)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= phi[i];
    return out;
}

Multiplier bracket_multiplier(int m)
{
    return Multiplier{"bracket^" + std::to_string(m), m,
                      [m](Point xi) { return cplx(std::pow(1.0 + xi[0] * xi[0] + xi[1] * xi[1], 0.5 * m)); }, true};
}

Multiplier modulus_multiplier()
{
    return Multiplier{"modulus", 1, [](Point xi) { return cplx(std::hypot(xi[0], xi[1])); }, true};
}

Field apply_multiplier(const Multiplier& a, const Field& u)
{
    const FrequencyLattice lat(u.spec());
    std::vector<cplx> m(u.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = a.symbol(lat.xi[i]);
    return apply_multiplier(u, m);
}

bool ConicRegion::contains(Point x, Point dir, const GridSpec& spec) const
{
    const auto in_cell = [&](const Cell& c) {
        for (const auto& b : c.balls)
            if (periodic_distance(x, b.center, spec) > b.radius + position_tol) return false;
        for (const auto& k : c.cones)
            if (direction_gap(dir, k, dim) > k.half_angle + angle_tol) return false;
        return true;
    };
    const bool inside = std::any_of(cells.begin(), cells.end(), in_cell);
    if (!complemented) return inside;
    return !inside || near_boundary(x, dir, spec);
}

bool ConicRegion::near_boundary(Point x, Point dir, const GridSpec& spec) const
{
    for (const auto& c : cells) {
        for (const auto& b : c.balls)
            if (std::abs(periodic_distance(x, b.center, spec) - b.radius) <= position_tol) return true;
        for (const auto& k : c.cones)
            if (dim == 2 && std::abs(direction_gap(dir, k, dim) - k.half_angle) <= angle_tol) return true;
    }
    return false;
}

bool ConicRegion::empty() const
{
    if (complemented)
        return std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return c.balls.empty() && c.cones.empty(); });
    return cells.empty();
}

ConicRegion intersect(const ConicRegion& a, const ConicRegion& b)
{
    if (a.complemented || b.complemented) throw InvalidArgument("intersect: complemented regions are not supported");
    if (a.dim != b.dim) throw InvalidArgument("intersect: dimension mismatch");
    ConicRegion out;
    out.dim = a.dim;
    out.position_tol = std::max(a.position_tol, b.position_tol);
    out.angle_tol = std::max(a.angle_tol, b.angle_tol);
    for (const auto& ca : a.cells)
        for (const auto& cb : b.cells) {
            ConicRegion::Cell c = ca;
            c.balls.insert(c.balls.end(), cb.balls.begin(), cb.balls.end());
            c.cones.insert(c.cones.end(), cb.cones.begin(), cb.cones.end());
            out.cells.push_back(std::move(c));
        }
    return out;
}

namespace {

ConicRegion support_region(const SeparableSymbol& sym, int dim)
{
    ConicRegion r;
    r.dim = dim;
    ConicRegion::Cell c;
    if (sym.window) {
        c.balls.push_back({sym.window->center, sym.window->width});
        r.position_tol = 1e-9 * sym.window->width;
    }
    if (sym.cone) {
        c.cones.push_back(*sym.cone);
        r.angle_tol = 1e-9;
    }
    r.cells.push_back(std::move(c));
    return r;
}

}  // namespace

ConicRegion elliptic_set(const SeparableSymbol& sym, int dim)
{
    sym.validate(dim);
    return support_region(sym, dim);
}

ConicRegion char_set(const SeparableSymbol& sym, int dim)
{
    auto r = elliptic_set(sym, dim);
    r.complemented = true;
    return r;
}

ConicRegion char_set(const Multiplier& a, int dim)
{
    ConicRegion r;
    r.dim = dim;
    if (!a.elliptic) r.cells.push_back({});
    return r;
}

ConicRegion ess_supp(const SeparableSymbol& sym, int dim)
{
    sym.validate(dim);
    return support_region(sym, dim);
}

MicrolocalityReport microlocality_check(const SeparableSymbol& sym, const Field& u, const std::vector<Point>& points,
                                        double alpha, const ScanConfig& cfg)
{
    const auto& spec = u.spec();
    MicrolocalityReport rep;
    rep.alpha = alpha;
    ScanConfig sc = cfg;
    sc.alphas = {alpha};
    rep.u_scan = wf_scan(u, points, sc);
    rep.au_scan = wf_scan(apply_localizer(sym, u), points, sc);
    const double margin = sc.detector.margin;
    const double fan_cell = spec.dim == 2 ? 2.0 * pi / static_cast<double>(rep.au_scan.directions.size()) : 0.0;
    const std::size_t nd = rep.au_scan.directions.size();

    const auto supp = ess_supp(sym, spec.dim);
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t d = 0; d < nd; ++d) {
            const auto& e = rep.au_scan.at(p, d);
            if (classify(e, alpha, margin) != Classification::In) continue;
            const double radius = e.verdict_radius_cells * spec.spacing();
            ConicRegion widened = supp;
            widened.position_tol += radius;
            widened.angle_tol += fan_cell;
            const bool in_supp = widened.contains(points[p], e.cone.direction, spec);

            bool near_in = false;
            for (std::size_t q = 0; q < points.size() && !near_in; ++q) {
                if (periodic_distance(points[q], points[p], spec) > radius + 1e-12) continue;
                for (std::size_t d2 = 0; d2 < nd && !near_in; ++d2) {
                    const double gap = spec.dim == 2
                        ? std::abs(wrap_angle(rep.u_scan.directions[d2].angle() - e.cone.angle()))
                        : (d2 == d ? 0.0 : pi);
                    if (gap > fan_cell + 1e-12) continue;
                    near_in = classify(rep.u_scan.at(q, d2), alpha, margin) == Classification::In;
                }
            }
            if (!in_supp || !near_in)
                rep.violations.push_back({points[p], e.cone.angle(), e.fit.slope, !in_supp, !near_in});
        }
    return rep;
}

bool CrosscheckEntry::disagree() const
{
    return detector != Classification::Undecided && localizer != Classification::Undecided && detector != localizer;
}

Classification localizer_decision(const std::vector<LocalizerProbe>& probes, double alpha, double margin)
{
    if (probes.empty()) return Classification::Undecided;
    bool all_in = true;
    for (const auto& p : probes) {
        if (p.fit.slope >= alpha + margin) return Classification::Out;
        all_in = all_in && p.fit.slope < alpha - margin;
    }
    return all_in ? Classification::In : Classification::Undecided;
}

CrosscheckReport characterization_crosscheck(const Field& u, Point point, const ConeSpec& cone,
                                             const std::vector<double>& alphas, const CrosscheckConfig& cfg)
{
    const auto& spec = u.spec();
    CrosscheckReport rep;
    rep.point = point;
    rep.cone = cone;
    DetectorConfig dc = cfg.detector;
    dc.zero_order = dc.zero_order || std::any_of(alphas.begin(), alphas.end(), [](double a) { return a >= 0.0; });
    rep.detector = Detector(u, dc).test(point, cone);

    std::vector<double> widths = cfg.window_cells;
    if (widths.empty()) {
        const double n = static_cast<double>(spec.n);
        widths = {n / 16.0, n / 8.0, n / 4.0};
    }
    const std::vector<double> angles = spec.dim == 2 ? cfg.half_angles : std::vector<double>{cone.half_angle};
    const Kernel k = make_kernel(cfg.kernel_order, spec.dim);
    const double cap_threshold = 2.0 * k.laplacian_power() - 0.75;
    const double n = static_cast<double>(spec.n);
    const double reference = std::max(u.sup_norm(), std::numeric_limits<double>::min());
    for (double w : widths) {
        // Same probe band as a detector window of this radius.
        Vec lambdas;
        const double low = std::max(dc.band_low_1d, dc.window_factor * n / w);
        for (int i = 1;; ++i) {
            const double lambda = std::exp2(-static_cast<double>(i) / dc.steps_per_octave);
            const double probe = k.annulus_eps() / (lambda * spec.dual_unit());
            if (probe > dc.band_high * n / 2.0) break;
            if (probe >= low) lambdas.push_back(lambda);
        }
        for (double a : angles) {
            SeparableSymbol sym;
            sym.window = Window{point, w * spec.spacing(), dc.window_sharpness};
            sym.cone = ConeSpec{cone.direction, a};
            const SpectralField au = transform(apply_localizer(sym, u));
            Vec sups;
            for (double lambda : lambdas) sups.push_back(local_mean_field(au, k, lambda).sup_norm());
            ScalingFit fit;
            if (std::all_of(sups.begin(), sups.end(), [&](double s) { return s <= 1e-12 * reference; })) {
                fit.slope = kCapSlope;
                fit.capped = true;
                fit.lambdas = lambdas;
                fit.sups = sups;
            } else {
                fit = fit_exponent(lambdas, sups, {.reference = reference, .cap_threshold = cap_threshold});
            }
            rep.probes.push_back({w, a, fit});
        }
    }
    for (double alpha : alphas)
        rep.entries.push_back({alpha, classify(rep.detector, alpha, dc.margin),
                               localizer_decision(rep.probes, alpha, dc.margin)});
    return rep;
}

bool EllipticReport::ok() const
{
    return std::all_of(entries.begin(), entries.end(), [](const EllipticEntry& e) { return e.pass; });
}

EllipticReport elliptic_regularity_check(const Multiplier& a, const Field& u, const std::vector<Point>& points,
                                         const std::vector<ConeSpec>& cones, const DetectorConfig& cfg, double tolerance)
{
    EllipticReport rep;
    rep.symbol = a.name;
    rep.order = a.order;
    rep.tolerance = tolerance;
    const Detector before(u, cfg);
    const Detector after(apply_multiplier(a, u), cfg);
    for (const auto& x : points) {
        const auto fb = before.test_point(x, cones);
        const auto fa = after.test_point(x, cones);
        for (std::size_t c = 0; c < cones.size(); ++c) {
            EllipticEntry e{x, cones[c].angle(), {}, {}, false};
            if (fb[c].has_verdict) e.before = fb[c].fit.slope;
            if (fa[c].has_verdict) e.after = fa[c].fit.slope;
            if (e.before && e.after) {
                if (fb[c].fit.capped || fa[c].fit.capped) e.pass = fb[c].fit.capped && fa[c].fit.capped;
                else e.pass = std::abs(*e.after - (*e.before - a.order)) <= tolerance;
            } else {
                e.pass = !e.before && !e.after;
            }
            rep.entries.push_back(e);
        }
    }
    return rep;
}

bool SymbolBoundReport::ok() const
{
    return std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r <= limit; });
}

SymbolBoundReport symbol_bound_check(const SeparableSymbol& sym, const GridSpec& spec, double limit)
{
    sym.validate(spec.dim);
    SymbolBoundReport rep;
    rep.limit = limit;
    const auto sigma = [&](Point xi) {
        return dir_cutoff(sym, xi, spec.dim) * freq_cutoff(sym, std::hypot(xi[0], xi[1]));
    };
    const double a = sym.chi_inner > 0.0 ? sym.chi_inner : 1.0;
    const int rays = spec.dim == 2 ? 720 : 2;
    std::array<double, 3> inner{0.0, 0.0, 0.0}, outer{0.0, 0.0, 0.0};
    for (int s = 0; s <= 44; ++s) {
        const double r = a * std::exp2(s / 4.0);
        for (int q = 0; q < rays; ++q) {
            const double th = spec.dim == 2 ? 2.0 * pi * (q + 0.5) / rays : (q == 0 ? 0.0 : pi);
            const Point xi{r * std::cos(th), spec.dim == 2 ? r * std::sin(th) : 0.0};
            const double bracket = std::sqrt(1.0 + r * r);
            const double h1 = 1e-4 * r, h2 = 1e-3 * r;
            std::array<double, 3> v{std::abs(sigma(xi)), 0.0, 0.0};
            for (int i = 0; i < spec.dim; ++i) {
                Point p = xi, m = xi;
                p[i] += h1;
                m[i] -= h1;
                v[1] = std::max(v[1], std::abs(sigma(p) - sigma(m)) / (2.0 * h1) * bracket);
                for (int j = 0; j < spec.dim; ++j) {
                    auto at = [&](double si, double sj) {
                        Point z = xi;
                        z[i] += si * h2;
                        z[j] += sj * h2;
                        return sigma(z);
                    };
                    const double d2 = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h2 * h2);
                    v[2] = std::max(v[2], std::abs(d2) * bracket * bracket);
                }
            }
            auto& dst = r <= 4.0 * a ? inner : outer;
            for (int b = 0; b < 3; ++b) dst[b] = std::max(dst[b], v[b]);
        }
    }
    for (int b = 0; b < 3; ++b) rep.ratios[b] = outer[b] <= 1e-12 ? 0.0 : outer[b] / std::max(inner[b], 1e-12);
    return rep;
}

bool BoundednessReport::ok() const
{
    return !ratios.empty() && std::isfinite(constant) && spread <= spread_limit;
}

BoundednessReport boundedness_check(const Multiplier& a, const std::vector<Field>& corpus, double alpha,
                                    double spread_limit)
{
    BoundednessReport rep;
    rep.symbol = a.name;
    rep.spread_limit = spread_limit;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& u : corpus) {
        const auto part = build_partition(u.spec());
        const double nu = besov_norm(u, part, {alpha});
        if (!(nu > 0.0)) continue;
        const double r = besov_norm(apply_multiplier(a, u), part, {alpha - a.order}) / nu;
        rep.ratios.push_back(r);
        rep.constant = std::max(rep.constant, r);
        lo = std::min(lo, r);
    }
    rep.spread = rep.ratios.empty() ? std::numeric_limits<double>::infinity() : rep.constant / lo;
    return rep;
}

}  // namespace besovwf
