#include "besovwf/wavefront.hpp"

#include "besovwf/error.hpp"
#include "besovwf/io.hpp"
#include "besovwf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace besovwf {

using std::numbers::pi;

namespace {

constexpr double kVanishing = 1e-10;
constexpr double kNegligible = 1e-12;
constexpr std::size_t kMinConeSamples = 16;

double bump(double r, double p)
{
    return r < 1.0 ? std::exp(p - p / (1.0 - r * r)) : 0.0;
}

double periodic_distance(Point a, Point b, const GridSpec& spec)
{
    double r2 = 0.0;
    for (int i = 0; i < spec.dim; ++i) {
        const double d = std::remainder(a[i] - b[i], spec.length);
        r2 += d * d;
    }
    return std::sqrt(r2);
}

double taper(double modulus, double start, double end)
{
    if (modulus <= start) return 1.0;
    if (modulus >= end) return 0.0;
    return 0.5 * (1.0 + std::cos(pi * (modulus - start) / (end - start)));
}

ScalingFit capped_fit()
{
    ScalingFit fit;
    fit.slope = kCapSlope;
    fit.r_squared = 1.0;
    fit.capped = true;
    return fit;
}

}  // namespace

ConeSpec ConeSpec::at_angle(double angle, double half_angle)
{
    return ConeSpec{{std::cos(angle), std::sin(angle)}, half_angle};
}

double ConeSpec::angle() const
{
    return std::atan2(direction[1], direction[0]);
}

bool ConeSpec::contains(Point xi, int dim) const
{
    if (dim == 1) return xi[0] != 0.0 && (xi[0] > 0.0) == (direction[0] > 0.0);
    const double r = std::hypot(xi[0], xi[1]);
    if (r == 0.0) return false;
    const double c = std::clamp((xi[0] * direction[0] + xi[1] * direction[1]) / r, -1.0, 1.0);
    return std::acos(c) < half_angle;
}

void ConeSpec::validate() const
{
    if (std::abs(std::hypot(direction[0], direction[1]) - 1.0) > 1e-12)
        throw InvalidArgument("cone: direction must be a unit vector");
    if (!(half_angle > 0.0 && half_angle < pi / 2)) throw InvalidArgument("cone: half angle must lie in (0, pi/2)");
}

double Window::operator()(Point x, const GridSpec& spec) const
{
    return bump(periodic_distance(x, center, spec) / width, sharpness);
}

std::vector<WindowChoice> DetectorConfig::window_family(const GridSpec& spec) const
{
    if (!windows.empty()) return windows;
    const double n = static_cast<double>(spec.n);
    return {{6.0, true}, {n / 32.0, false}, {n / 8.0, false}};
}

std::string to_string(Classification c)
{
    switch (c) {
    case Classification::In: return "IN";
    case Classification::Out: return "OUT";
    case Classification::Undecided: break;
    }
    return "UNDECIDED";
}

Classification classify(const DirectionalFit& fit, double alpha, double margin)
{
    if (!fit.has_verdict) return Classification::Undecided;
    if (fit.fit.slope < alpha - margin) return Classification::In;
    if (alpha >= 0.0 && fit.zero_order_bounded == false) return Classification::In;
    if (fit.fit.slope >= alpha + margin) return Classification::Out;
    return Classification::Undecided;
}

struct Detector::Prepared {
    Window window;
    std::vector<std::size_t> support;
    SpectralField spectrum;
    bool vanishes = false;
};

Detector::Detector(const Field& u, DetectorConfig cfg)
    : spec_(u.spec()),
      cfg_(std::move(cfg)),
      kernel_(make_kernel(cfg_.kernel_order, u.spec().dim)),
      plain_(make_kernel(-1, u.spec().dim)),
      lattice_(u.spec()),
      raw_(u)
{
    if (cfg_.kernel_order < 0) throw InvalidArgument("detector: kernel order must be >= 0");
    if (spec_.dim == 2 && !(cfg_.half_angle > 0.0 && cfg_.half_angle < pi / 2))
        throw InvalidArgument("detector: half angle must lie in (0, pi/2)");
    if (!(cfg_.taper_start < cfg_.taper_end)) throw InvalidArgument("detector: taper_start must be below taper_end");
    umax_ = raw_.sup_norm();
    auto U = transform(raw_);
    const double ny = spec_.nyquist();
    for (std::size_t i = 0; i < U.size(); ++i)
        U[i] *= taper(lattice_.modulus[i], cfg_.taper_start * ny, cfg_.taper_end * ny);
    filtered_ = inverse(U);
    if (raw_.is_real(0.0))
        for (auto& v : filtered_.samples()) v = v.real();
}

Detector::Prepared Detector::prepare(const Window& w) const
{
    Prepared p;
    p.window = w;
    Field windowed(spec_);
    double raw_max = 0.0;
    for (std::size_t i = 0; i < windowed.size(); ++i) {
        const double phi = w(raw_.position(i), spec_);
        if (phi <= 0.0) continue;
        p.support.push_back(i);
        windowed[i] = phi * filtered_[i];
        raw_max = std::max(raw_max, phi * std::abs(raw_[i]));
    }
    p.vanishes = raw_max <= kVanishing * umax_;
    if (!p.vanishes) p.spectrum = transform(windowed);
    return p;
}

Vec Detector::admissible_ladder(double radius_cells, double probe_eps) const
{
    const double n = static_cast<double>(spec_.n);
    const double low = std::max(spec_.dim == 2 ? cfg_.cone_floor / cfg_.half_angle : cfg_.band_low_1d,
                                cfg_.window_factor * n / radius_cells);
    const double high = cfg_.band_high * n / 2.0;
    Vec out;
    for (int k = 1;; ++k) {
        const double lambda = std::exp2(-static_cast<double>(k) / cfg_.steps_per_octave);
        const double probe = probe_eps / (lambda * spec_.dual_unit());
        if (probe > high) break;
        if (probe >= low) out.push_back(lambda);
    }
    return out;
}

std::optional<ScalingFit> Detector::run(const Prepared& p, const ConeSpec& cone, const Kernel& k, const Vec& lambdas,
                                        double cap_threshold) const
{
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < lattice_.k.size(); ++i)
        if (cone.contains(lattice_.xi[i], spec_.dim)) slots.push_back(i);
    if (slots.size() < kMinConeSamples) throw NumericalError("insufficient cone sampling");

    Vec sups;
    SpectralField G(spec_);
    for (double lambda : lambdas) {
        std::fill(G.coeffs().begin(), G.coeffs().end(), cplx{});
        for (std::size_t s : slots) G[s] = p.spectrum[s] * k.spectral(lambda * lattice_.modulus[s]);
        const Field g = inverse(G);
        double sup = 0.0;
        for (std::size_t i : p.support) sup = std::max(sup, std::abs(g[i]));
        sups.push_back(sup);
    }
    if (!sups.empty() && std::all_of(sups.begin(), sups.end(), [&](double s) { return s < kNegligible * umax_; })) {
        auto fit = capped_fit();
        fit.lambdas = lambdas;
        fit.sups = sups;
        return fit;
    }
    if (lambdas.size() < 4) return std::nullopt;
    return fit_exponent(lambdas, sups,
                        FitOptions{.reference = umax_, .floor = kNegligible, .cap_threshold = cap_threshold});
}

std::optional<bool> Detector::zero_order(Point x, const ConeSpec& cone, double radius_cells) const
{
    // |Σ_{k∈Γ} (φu)^(k) κ̲̌(ξ_k) e^{iξ_k·x}| at unit scale, one value per window width.
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < lattice_.k.size(); ++i)
        if (cone.contains(lattice_.xi[i], spec_.dim)) slots.push_back(i);
    std::optional<bool> bounded;
    for (double scale : cfg_.zero_order_scales) {
        const auto p = prepare(Window{x, radius_cells * scale * spec_.spacing(), cfg_.window_sharpness});
        double sup = 0.0;
        if (!p.vanishes) {
            SpectralField G(spec_);
            for (std::size_t s : slots) G[s] = p.spectrum[s] * plain_.spectral(lattice_.modulus[s]);
            const Field g = inverse(G);
            for (std::size_t i : p.support) sup = std::max(sup, std::abs(g[i]));
        }
        bounded = bounded.value_or(true) && std::isfinite(sup);
    }
    return bounded;
}

std::vector<DirectionalFit> Detector::test_point(Point x, const std::vector<ConeSpec>& cones) const
{
    for (const auto& c : cones)
        if (spec_.dim == 2) c.validate();
    std::vector<DirectionalFit> out(cones.size());
    for (std::size_t c = 0; c < cones.size(); ++c) {
        out[c].point = x;
        out[c].cone = cones[c];
    }
    const double cap_threshold = 2.0 * kernel_.laplacian_power() - 0.75;
    for (const auto& choice : cfg_.window_family(spec_)) {
        const auto p = prepare(Window{x, choice.radius_cells * spec_.spacing(), cfg_.window_sharpness});
        std::vector<std::optional<ScalingFit>> fits(cones.size());
        if (p.vanishes) {
            for (auto& f : fits) f = capped_fit();
        } else if (!choice.cap_only) {
            const Vec lambdas = admissible_ladder(choice.radius_cells, kernel_.annulus_eps());
            if (lambdas.size() >= 4)
                for (std::size_t c = 0; c < cones.size(); ++c) fits[c] = run(p, cones[c], kernel_, lambdas, cap_threshold);
        }
        for (std::size_t c = 0; c < cones.size(); ++c) {
            auto& e = out[c];
            WindowSlope ws{choice.radius_cells, {}};
            if (fits[c]) {
                ws.slope = fits[c]->slope;
                if (!e.has_verdict || fits[c]->slope > e.fit.slope) {
                    e.fit = *fits[c];
                    e.has_verdict = true;
                    e.verdict_radius_cells = choice.radius_cells;
                }
            }
            e.windows.push_back(ws);
        }
    }
    if (cfg_.zero_order)
        for (auto& e : out)
            if (e.has_verdict) e.zero_order_bounded = e.fit.capped ? std::optional<bool>(true) : zero_order(x, e.cone, e.verdict_radius_cells);
    return out;
}

DirectionalFit Detector::test(Point x, const ConeSpec& cone) const
{
    return test_point(x, {cone}).front();
}

DirectionalFit Detector::test_window(const Window& w, const ConeSpec& cone, const Kernel& k, const LambdaLadder& ladder) const
{
    if (spec_.dim == 2) cone.validate();
    DirectionalFit e;
    e.point = w.center;
    e.cone = cone;
    const double cells = w.width / spec_.spacing();
    e.verdict_radius_cells = cells;
    const auto p = prepare(w);
    std::optional<ScalingFit> fit;
    if (p.vanishes) fit = capped_fit();
    else fit = run(p, cone, k, ladder.values, k.laplacian_power() > 0 ? 2.0 * k.laplacian_power() - 0.75 : kCapSlope);
    if (fit) {
        e.fit = *fit;
        e.has_verdict = true;
    }
    e.windows.push_back({cells, fit ? std::optional<double>(fit->slope) : std::nullopt});
    if (cfg_.zero_order && e.has_verdict)
        e.zero_order_bounded = e.fit.capped ? std::optional<bool>(true) : zero_order(w.center, cone, cells);
    return e;
}

DirectionalFit cone_scaling_test(const Field& u, const Window& w, const ConeSpec& cone, const Kernel& k,
                                 const LambdaLadder& ladder, const DetectorConfig& cfg)
{
    return Detector(u, cfg).test_window(w, cone, k, ladder);
}

std::vector<ConeSpec> direction_fan(int dim, int count, double half_angle)
{
    if (dim == 1) return {ConeSpec{{1.0, 0.0}, half_angle}, ConeSpec{{-1.0, 0.0}, half_angle}};
    if (count < 4) throw InvalidArgument("direction fan needs at least 4 directions");
    std::vector<ConeSpec> fan;
    for (int i = 0; i < count; ++i) fan.push_back(ConeSpec::at_angle(2.0 * pi * i / count, half_angle));
    return fan;
}

const DirectionalFit& WFScanResult::at(std::size_t point, std::size_t direction) const
{
    return entries.at(point * directions.size() + direction);
}

WFScanResult wf_scan(const Field& u, const std::vector<Point>& points, const ScanConfig& cfg)
{
    if (points.empty()) throw InvalidArgument("wf_scan: no points");
    DetectorConfig dc = cfg.detector;
    dc.zero_order = dc.zero_order || std::any_of(cfg.alphas.begin(), cfg.alphas.end(), [](double a) { return a >= 0.0; });
    const Detector det(u, dc);
    WFScanResult res;
    res.spec = u.spec();
    res.points = points;
    res.directions = direction_fan(u.spec().dim, cfg.fan, dc.half_angle);
    res.kernel_order = dc.kernel_order;
    res.windows = dc.window_family(u.spec());
    res.margin = dc.margin;
    res.entries.resize(points.size() * res.directions.size());
    parallel_for(points.size(), dc.threads, [&](std::size_t p) {
        auto fits = det.test_point(points[p], res.directions);
        std::move(fits.begin(), fits.end(), res.entries.begin() + static_cast<long>(p * res.directions.size()));
    });
    return res;
}

double threshold_estimate(const Field& u, Point x, const ConeSpec& cone, const DetectorConfig& cfg)
{
    const auto fit = Detector(u, cfg).test(x, cone);
    if (!fit.has_verdict) throw NumericalError("threshold_estimate: no window produced a verdict");
    return fit.fit.slope;
}

UnionReport wf_union_check(const Field& u, const Field& v, const std::vector<Point>& points, const ScanConfig& cfg)
{
    UnionReport rep;
    rep.u = wf_scan(u, points, cfg);
    rep.v = wf_scan(v, points, cfg);
    rep.sum = wf_scan(u + v, points, cfg);
    const double m = cfg.detector.margin;
    for (std::size_t i = 0; i < rep.sum.entries.size(); ++i)
        for (double a : cfg.alphas)
            if (classify(rep.sum.entries[i], a, m) == Classification::In && classify(rep.u.entries[i], a, m) == Classification::Out
                && classify(rep.v.entries[i], a, m) == Classification::Out)
                rep.violations.push_back({rep.sum.entries[i].point, rep.sum.entries[i].cone.angle(), a});
    return rep;
}

bool compact_order_bound_check(const Field& u, int M, const std::vector<Point>& points, const ScanConfig& cfg)
{
    const auto scan = wf_scan(u, points, cfg);
    const double bound = -u.spec().dim - M - 0.25;
    return std::all_of(scan.entries.begin(), scan.entries.end(),
                       [&](const DirectionalFit& e) { return !e.has_verdict || e.fit.slope >= bound; });
}

std::array<std::size_t, 2> nearest_index(Point x, const GridSpec& spec)
{
    std::array<std::size_t, 2> idx{0, 0};
    for (int a = 0; a < spec.dim; ++a) {
        const double cells = std::round(x[a] / spec.spacing());
        const long n = static_cast<long>(spec.n);
        idx[a] = static_cast<std::size_t>(((static_cast<long>(cells) % n) + n) % n);
    }
    return idx;
}

std::string scan_csv(const WFScanResult& scan, const std::vector<double>& alphas)
{
    std::ostringstream os;
    os << (scan.spec.dim == 2 ? "i0,i1" : "i0") << ",dir_angle,slope,r2,zero_order_bounded";
    for (double a : alphas) os << ",class_alpha_" << io::format_double(a);
    os << '\n';
    for (const auto& e : scan.entries) {
        const auto idx = nearest_index(e.point, scan.spec);
        os << idx[0];
        if (scan.spec.dim == 2) os << ',' << idx[1];
        os << ',' << io::format_double(e.cone.angle()) << ',';
        if (e.has_verdict) os << io::format_double(e.fit.slope) << ',' << io::format_double(e.fit.r_squared);
        else os << "nan,nan";
        os << ',' << (e.zero_order_bounded ? (*e.zero_order_bounded ? "true" : "false") : "na");
        for (double a : alphas) os << ',' << to_string(classify(e, a, scan.margin));
        os << '\n';
    }
    return os.str();
}

}  // namespace besovwf
