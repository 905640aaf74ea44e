#include "besovwf/propagation.hpp"

#include "besovwf/error.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/lp.hpp"

#include <algorithm>
#include <cmath>

namespace besovwf {

using std::numbers::pi;

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * pi); }

double periodic_cells(Point a, Point b, const GridSpec& spec)
{
    double r2 = 0.0;
    for (int i = 0; i < spec.dim; ++i) {
        const double d = std::remainder(a[i] - b[i], spec.length);
        r2 += d * d;
    }
    return std::sqrt(r2) / spec.spacing();
}

Point wrap_point(Point x, const GridSpec& spec)
{
    for (int i = 0; i < spec.dim; ++i) {
        x[i] = std::fmod(x[i], spec.length);
        if (x[i] < 0.0) x[i] += spec.length;
    }
    return x;
}

// Angular gap of two directions; in 1D only the sign counts.
double direction_gap(double a, double b, int dim)
{
    if (dim == 1) return std::cos(a) * std::cos(b) > 0.0 ? 0.0 : pi;
    return std::abs(wrap_angle(a - b));
}

std::vector<ExponentEntry> exponents(const Field& before, const Field& after, const std::vector<Point>& points,
                                     const std::vector<ConeSpec>& cones, const DetectorConfig& cfg)
{
    const Detector d0(before, cfg), d1(after, cfg);
    std::vector<ExponentEntry> out;
    for (const Point& x : points) {
        const auto f0 = d0.test_point(x, cones);
        const auto f1 = d1.test_point(x, cones);
        for (std::size_t c = 0; c < cones.size(); ++c) {
            ExponentEntry e;
            e.point = x;
            e.angle = cones[c].angle();
            if (f0[c].has_verdict) {
                e.before = f0[c].fit.slope;
                e.before_capped = f0[c].fit.capped;
            }
            if (f1[c].has_verdict) {
                e.after = f1[c].fit.slope;
                e.after_capped = f1[c].fit.capped;
            }
            out.push_back(e);
        }
    }
    return out;
}

}  // namespace

MultiplierSymbol MultiplierSymbol::transport(Point v)
{
    MultiplierSymbol a;
    a.kind = Kind::Transport;
    a.velocity = v;
    return a;
}

MultiplierSymbol MultiplierSymbol::half_wave()
{
    MultiplierSymbol a;
    a.kind = Kind::HalfWave;
    return a;
}

MultiplierSymbol MultiplierSymbol::custom(std::function<double(Point)> a1, std::function<double(Point)> a0)
{
    if (!a1) throw InvalidArgument("custom symbol needs a principal part");
    for (int r = 0; r < 16; ++r) {
        const double th = 2.0 * pi * r / 16.0;
        const Point xi{1.5 * std::cos(th), 1.5 * std::sin(th)};
        const double base = a1(xi);
        for (double lam : {2.0, 5.0, 10.0}) {
            const double scaled = a1({lam * xi[0], lam * xi[1]});
            if (std::abs(scaled - lam * base) > 1e-8 * std::max(1.0, std::abs(lam * base)))
                throw InvalidArgument("custom symbol principal part is not homogeneous of degree 1");
        }
    }
    MultiplierSymbol a;
    a.kind = Kind::Custom;
    a.a1 = std::move(a1);
    a.a0 = std::move(a0);
    return a;
}

std::string MultiplierSymbol::name() const
{
    switch (kind) {
    case Kind::Transport: return "transport";
    case Kind::HalfWave: return "halfwave";
    case Kind::Custom: return "custom";
    }
    return "";
}

double MultiplierSymbol::value(Point xi) const
{
    switch (kind) {
    case Kind::Transport: return velocity[0] * xi[0] + velocity[1] * xi[1];
    case Kind::HalfWave: return std::hypot(xi[0], xi[1]);
    case Kind::Custom: return a1(xi) + (a0 ? a0(xi) : 0.0);
    }
    return 0.0;
}

double MultiplierSymbol::regularized(Point xi, const GridSpec& spec) const
{
    const double v = value(xi);
    if (kind == Kind::Transport) return v;
    return v * (1.0 - lp_cutoff(std::hypot(xi[0], xi[1]) / (xi_floor * spec.dual_unit())));
}

Point MultiplierSymbol::gradient(Point xi) const
{
    switch (kind) {
    case Kind::Transport: return velocity;
    case Kind::HalfWave: {
        const double r = std::hypot(xi[0], xi[1]);
        return {xi[0] / r, xi[1] / r};
    }
    case Kind::Custom: {
        const double h = 1e-4 * std::hypot(xi[0], xi[1]);
        Point g{};
        for (int i = 0; i < 2; ++i) {
            Point p = xi, m = xi;
            p[i] += h;
            m[i] -= h;
            g[i] = (value(p) - value(m)) / (2.0 * h);
        }
        return g;
    }
    }
    return {};
}

Field evolve(const Field& u0, const MultiplierSymbol& a, double t)
{
    if (!std::isfinite(t)) throw InvalidArgument("evolve: t must be finite");
    const FrequencyLattice lat(u0.spec());
    std::vector<cplx> m(lat.xi.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::polar(1.0, -t * a.regularized(lat.xi[i], u0.spec()));
    return apply_multiplier(u0, m);
}

FlowPoint hamiltonian_flow(const FlowPoint& p, const MultiplierSymbol& a, double t, double dual_unit)
{
    if (!(std::hypot(p.xi[0], p.xi[1]) > a.xi_floor))
        throw InvalidArgument("hamiltonian_flow: covector at or below the regularization floor");
    const Point g = a.gradient({p.xi[0] * dual_unit, p.xi[1] * dual_unit});
    return {{p.x[0] + t * g[0], p.x[1] + t * g[1]}, p.xi};
}

PropagationReport propagation_check(const Field& u0, const MultiplierSymbol& a, double t, double alpha,
                                    const PropagationConfig& cfg)
{
    const GridSpec& spec = u0.spec();
    const int d = spec.dim;
    PropagationReport rep;
    rep.alpha = alpha;
    rep.level = alpha - 0.5 * d;

    ScanConfig sc = cfg.scan;
    sc.alphas = {alpha};
    rep.source = wf_scan(u0, cfg.source_points, sc);
    sc.alphas = {rep.level};
    rep.target = wf_scan(evolve(u0, a, t), cfg.target_points, sc);

    const double fan_step = d == 1 ? pi : 2.0 * pi / cfg.scan.fan;
    const double angle_tol = cfg.fan_tol * fan_step;
    const double probe = 64.0;  // lattice units, far above the floor
    const double margin = cfg.scan.detector.margin;

    for (const DirectionalFit& e : rep.source.entries) {
        if (classify(e, alpha, margin) != Classification::In) continue;
        const double th = e.cone.angle();
        const int steps = d == 1 ? 0 : static_cast<int>(std::floor(0.5 * fan_step / cfg.flow_step));
        for (int s = -steps; s <= steps; ++s) {
            const double w = th + s * cfg.flow_step;
            FlowPoint p{e.point, {probe * std::cos(w), d == 1 ? 0.0 : probe * std::sin(w)}};
            FlowPoint q = hamiltonian_flow(p, a, t, spec.dual_unit());
            q.x = wrap_point(q.x, spec);
            rep.flowed.push_back(q);
        }
    }

    auto near = [&](Point y, double dir, Point x, double w) {
        return periodic_cells(x, y, spec) <= cfg.position_tol_cells && direction_gap(dir, w, d) <= angle_tol + 1e-12;
    };
    std::vector<char> target_in(rep.target.entries.size());
    for (std::size_t i = 0; i < target_in.size(); ++i)
        target_in[i] = classify(rep.target.entries[i], rep.level, margin) == Classification::In;

    for (std::size_t i = 0; i < target_in.size(); ++i) {
        if (!target_in[i]) continue;
        const DirectionalFit& e = rep.target.entries[i];
        const bool explained = std::any_of(rep.flowed.begin(), rep.flowed.end(), [&](const FlowPoint& q) {
            return near(e.point, e.cone.angle(), q.x, std::atan2(q.xi[1], q.xi[0]));
        });
        if (!explained) rep.unexplained.push_back({e.point, e.cone.angle()});
    }
    for (const FlowPoint& q : rep.flowed) {
        const bool covered = std::any_of(cfg.target_points.begin(), cfg.target_points.end(), [&](Point y) {
            return periodic_cells(q.x, y, spec) <= cfg.position_tol_cells;
        });
        if (!covered) continue;
        ++rep.checked_flowed;
        const double w = std::atan2(q.xi[1], q.xi[0]);
        bool found = false;
        for (std::size_t i = 0; i < target_in.size() && !found; ++i)
            found = target_in[i] && near(rep.target.entries[i].point, rep.target.entries[i].cone.angle(), q.x, w);
        if (!found) rep.missing.push_back({q.x, w});
    }
    return rep;
}

bool ShiftReport::ok() const
{
    return std::all_of(entries.begin(), entries.end(), [](const ExponentEntry& e) { return e.pass; });
}

ShiftReport besov_shift_check(const Field& u0, const MultiplierSymbol& a, double t, const std::vector<Point>& points,
                              const std::vector<ConeSpec>& cones, const DetectorConfig& cfg)
{
    ShiftReport rep;
    rep.bound = 0.5 * u0.spec().dim + 0.25;
    rep.entries = exponents(u0, evolve(u0, a, t), points, cones, cfg);
    for (ExponentEntry& e : rep.entries) {
        if (!e.before) {
            e.pass = true;  // nothing to compare against
        } else if (e.before_capped) {
            e.pass = e.after.has_value();
        } else {
            e.pass = e.after && (e.after_capped || *e.after >= *e.before - rep.bound);
        }
    }
    return rep;
}

Field heat_convolve(const Field& u, double t)
{
    if (!(t > 0.0)) throw InvalidArgument("heat_convolve: t must be positive");
    const FrequencyLattice lat(u.spec());
    std::vector<cplx> m(lat.modulus.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-t * lat.modulus[i] * lat.modulus[i]);
    return apply_multiplier(u, m);
}

bool SchauderReport::ok() const
{
    return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const ExponentEntry& e) { return e.pass; });
}

SchauderReport schauder_check(const Field& u, double t, const std::vector<Point>& points,
                              const std::vector<ConeSpec>& cones, const DetectorConfig& cfg, double min_gain)
{
    SchauderReport rep;
    rep.t = t;
    rep.min_gain = min_gain;
    rep.entries = exponents(u, heat_convolve(u, t), points, cones, cfg);
    for (ExponentEntry& e : rep.entries) {
        if (!e.before || !e.after) continue;
        if (e.before_capped)
            e.pass = e.after_capped;
        else
            e.pass = e.after_capped || *e.after - *e.before >= min_gain;
    }
    return rep;
}

bool EmbeddingReport::ok() const
{
    return std::isfinite(norm_inf) && std::isfinite(norm_2) && ratio <= 1.0 + 1e-9;
}

EmbeddingReport compact_embedding_check(const Field& u, double alpha)
{
    const GridSpec& spec = u.spec();
    const Kernel k = make_kernel(std::max(static_cast<int>(std::floor(alpha)), -1), spec.dim);
    const LambdaLadder ladder = default_ladder(spec, k);
    EmbeddingReport rep;
    rep.alpha = alpha;
    rep.norm_inf = local_means_norm(u, alpha, k, ladder);
    rep.norm_2 = local_means_norm(u, alpha, k, ladder, 2.0);
    const double scale = std::pow(spec.length, 0.5 * spec.dim);
    rep.ratio = rep.norm_inf > 0.0 ? rep.norm_2 / (rep.norm_inf * scale) : 0.0;
    return rep;
}

}  // namespace besovwf
