#include "besovwf/grid.hpp"

#include "besovwf/error.hpp"
#include "fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace besovwf {

using std::numbers::pi;

void GridSpec::validate() const
{
    if (dim != 1 && dim != 2) throw InvalidArgument("grid: dim must be 1 or 2");
    if (n < 16 || !std::has_single_bit(n)) throw InvalidArgument("grid: n must be a power of two >= 16");
    if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid: box length must be positive");
}

std::size_t GridSpec::size() const
{
    return dim == 1 ? n : n * n;
}

Field::Field(GridSpec spec) : spec_(spec)
{
    spec_.validate();
    samples_.assign(spec_.size(), cplx{});
}

Field::Field(GridSpec spec, std::vector<cplx> samples) : spec_(spec), samples_(std::move(samples))
{
    spec_.validate();
    if (samples_.size() != spec_.size()) throw InvalidArgument("field: sample count does not match grid");
}

std::array<double, 2> Field::position(std::size_t i) const
{
    const double h = spec_.spacing();
    if (spec_.dim == 1) return {h * static_cast<double>(i), 0.0};
    return {h * static_cast<double>(i / spec_.n), h * static_cast<double>(i % spec_.n)};
}

std::size_t Field::flat(std::size_t i0, std::size_t i1) const
{
    return spec_.dim == 1 ? i0 : i0 * spec_.n + i1;
}

double Field::sup_norm() const
{
    double m = 0.0;
    for (const auto& v : samples_) m = std::max(m, std::abs(v));
    return m;
}

bool Field::is_real(double tol) const
{
    const double scale = std::max(sup_norm(), 1e-300);
    return std::all_of(samples_.begin(), samples_.end(),
                       [&](const cplx& v) { return std::abs(v.imag()) <= tol * scale; });
}

Field& Field::operator+=(const Field& other)
{
    if (!(other.spec_ == spec_)) throw InvalidArgument("field: grid mismatch");
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
    return *this;
}

Field& Field::operator-=(const Field& other)
{
    if (!(other.spec_ == spec_)) throw InvalidArgument("field: grid mismatch");
    for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
    return *this;
}

Field& Field::operator*=(cplx s)
{
    for (auto& v : samples_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, cplx s) { return a *= s; }

Field multiply(const Field& a, const Field& b)
{
    if (!(a.spec() == b.spec())) throw InvalidArgument("field: grid mismatch");
    Field out(a.spec());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

SpectralField::SpectralField(GridSpec spec) : spec_(spec)
{
    spec_.validate();
    coeffs_.assign(spec_.size(), cplx{});
}

SpectralField::SpectralField(GridSpec spec, std::vector<cplx> coeffs) : spec_(spec), coeffs_(std::move(coeffs))
{
    spec_.validate();
    if (coeffs_.size() != spec_.size()) throw InvalidArgument("spectrum: coefficient count does not match grid");
}

std::size_t SpectralField::slot(long k0, long k1) const
{
    const long n = static_cast<long>(spec_.n);
    auto wrap = [n](long k) {
        if (k < -n / 2 || k >= n / 2) throw InvalidArgument("spectrum: frequency outside lattice band");
        return static_cast<std::size_t>(k < 0 ? k + n : k);
    };
    return spec_.dim == 1 ? wrap(k0) : wrap(k0) * spec_.n + wrap(k1);
}

cplx SpectralField::at(long k0, long k1) const
{
    return coeffs_[slot(k0, k1)];
}

FrequencyLattice::FrequencyLattice(const GridSpec& s) : spec(s)
{
    spec.validate();
    const std::size_t total = spec.size();
    k.resize(total);
    xi.resize(total);
    modulus.resize(total);
    const double unit = spec.dual_unit();
    for (std::size_t i = 0; i < total; ++i) {
        const long k0 = signed_index(spec.dim == 1 ? i : i / spec.n, spec.n);
        const long k1 = spec.dim == 1 ? 0 : signed_index(i % spec.n, spec.n);
        k[i] = {k0, k1};
        xi[i] = {unit * static_cast<double>(k0), unit * static_cast<double>(k1)};
        modulus[i] = std::hypot(xi[i][0], xi[i][1]);
    }
}

SpectralField transform(const Field& f)
{
    const auto& spec = f.spec();
    std::vector<cplx> data(f.samples().begin(), f.samples().end());
    for (const auto& v : data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InvalidArgument("transform: non-finite sample");
    detail::dft_inplace(data, spec, -1);
    const double w = std::pow(spec.spacing(), spec.dim);
    for (auto& v : data) v *= w;
    return SpectralField(spec, std::move(data));
}

Field inverse(const SpectralField& F)
{
    const auto& spec = F.spec();
    std::vector<cplx> data(F.coeffs().begin(), F.coeffs().end());
    for (const auto& v : data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw InvalidArgument("inverse: non-finite coefficient");
    detail::dft_inplace(data, spec, +1);
    const double w = std::pow(1.0 / spec.length, spec.dim);
    for (auto& v : data) v *= w;
    return Field(spec, std::move(data));
}

Field apply_multiplier(const Field& u, std::span<const cplx> multiplier)
{
    auto F = transform(u);
    if (multiplier.size() != F.size()) throw InvalidArgument("multiplier: size does not match grid");
    for (std::size_t i = 0; i < F.size(); ++i) F[i] *= multiplier[i];
    return inverse(F);
}

cplx interpolate(const SpectralField& F, std::array<double, 2> x)
{
    const auto& spec = F.spec();
    const double unit = spec.dual_unit();
    const std::size_t n = spec.n;
    cplx acc{};
    if (spec.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const double k = static_cast<double>(signed_index(i, n));
            acc += F[i] * std::polar(1.0, unit * k * x[0]);
        }
        return acc / spec.length;
    }
    std::vector<cplx> e1(n);
    for (std::size_t j = 0; j < n; ++j) e1[j] = std::polar(1.0, unit * static_cast<double>(signed_index(j, n)) * x[1]);
    for (std::size_t i = 0; i < n; ++i) {
        cplx row{};
        for (std::size_t j = 0; j < n; ++j) row += F[i * n + j] * e1[j];
        acc += row * std::polar(1.0, unit * static_cast<double>(signed_index(i, n)) * x[0]);
    }
    return acc / (spec.length * spec.length);
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kQuarterPowerExponent = 0.5;

/// Fourier constant of |x|^a on ℝ^d: 2^{a+d} π^{d/2} Γ((a+d)/2) / Γ(-a/2).
double power_constant(int dim, double a)
{
    const double d = dim;
    return std::pow(2.0, a + d) * std::pow(pi, d / 2.0) * std::tgamma((a + d) / 2.0) / std::tgamma(-a / 2.0);
}

double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool inside_box(std::array<double, 2> c, const GridSpec& spec)
{
    const bool in0 = c[0] >= 0.0 && c[0] < spec.length;
    const bool in1 = spec.dim == 1 || (c[1] >= 0.0 && c[1] < spec.length);
    return in0 && in1;
}

void require_center(std::array<double, 2> c, const GridSpec& spec)
{
    if (!inside_box(c, spec)) throw InvalidArgument("synthesize: center outside the box");
}

double phase(std::array<double, 2> xi, std::array<double, 2> c, int dim)
{
    return dim == 1 ? xi[0] * c[0] : xi[0] * c[0] + xi[1] * c[1];
}

SpectralField spectral_from(const GridSpec& spec, auto&& coefficient)
{
    const FrequencyLattice lat(spec);
    SpectralField F(spec);
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = coefficient(lat, i);
    return F;
}

bool at_nyquist(const FrequencyLattice& lat, std::size_t i, int axis)
{
    return lat.k[i][axis] == -static_cast<long>(lat.spec.n / 2);
}

}  // namespace

std::string kind_name(const SynthKind& kind)
{
    struct Namer {
        std::string operator()(const synth::Delta&) const { return "delta"; }
        std::string operator()(const synth::DeltaDerivative&) const { return "delta_derivative"; }
        std::string operator()(const synth::RadialQuarterPower&) const { return "radial_quarter_power"; }
        std::string operator()(const synth::Weierstrass&) const { return "weierstrass"; }
        std::string operator()(const synth::Gaussian&) const { return "gaussian"; }
        std::string operator()(const synth::LineDelta&) const { return "line_delta"; }
        std::string operator()(const synth::PlaneWave&) const { return "plane_wave"; }
    };
    return std::visit(Namer{}, kind);
}

cplx continuum_transform(const SynthKind& kind, std::array<double, 2> xi, int dim)
{
    const double r = dim == 1 ? std::abs(xi[0]) : std::hypot(xi[0], xi[1]);
    if (const auto* d = std::get_if<synth::Delta>(&kind)) return std::polar(1.0, -phase(xi, d->center, dim));
    if (const auto* d = std::get_if<synth::DeltaDerivative>(&kind))
        return cplx(0.0, xi[d->axis]) * std::polar(1.0, -phase(xi, d->center, dim));
    if (const auto* q = std::get_if<synth::RadialQuarterPower>(&kind)) {
        if (r == 0.0) return 0.0;
        const double c = power_constant(dim, kQuarterPowerExponent);
        return c * std::pow(r, -kQuarterPowerExponent - dim) * std::polar(1.0, -phase(xi, q->center, dim));
    }
    if (const auto* g = std::get_if<synth::Gaussian>(&kind)) {
        const double w2 = g->width * g->width;
        return std::pow(2.0 * pi * w2, dim / 2.0) * std::exp(-0.5 * w2 * r * r)
            * std::polar(1.0, -phase(xi, g->center, dim));
    }
    throw InvalidArgument("continuum transform: only point-type objects have one (" + kind_name(kind) + ")");
}

SynthResult synthesize(const SynthKind& kind, const GridSpec& spec)
{
    spec.validate();
    SynthResult out;
    const int dim = spec.dim;

    if (const auto* d = std::get_if<synth::Delta>(&kind)) {
        require_center(d->center, spec);
        if (spec.n < 64) out.warnings.push_back("band limit too small for delta tests (n < 64)");
        out.field = inverse(spectral_from(spec, [&](const FrequencyLattice& lat, std::size_t i) {
            return continuum_transform(kind, lat.xi[i], dim);
        }));
        return out;
    }
    if (const auto* d = std::get_if<synth::DeltaDerivative>(&kind)) {
        require_center(d->center, spec);
        if (d->axis < 0 || d->axis >= dim) throw InvalidArgument("synthesize: derivative axis out of range");
        if (spec.n < 64) out.warnings.push_back("band limit too small for delta tests (n < 64)");
        // The unpaired Nyquist mode of an odd multiplier is dropped so the field stays real.
        out.field = inverse(spectral_from(spec, [&](const FrequencyLattice& lat, std::size_t i) {
            return at_nyquist(lat, i, d->axis) ? cplx{} : continuum_transform(kind, lat.xi[i], dim);
        }));
        return out;
    }
    if (const auto* q = std::get_if<synth::RadialQuarterPower>(&kind)) {
        require_center(q->center, spec);
        const auto F = spectral_from(spec, [&](const FrequencyLattice& lat, std::size_t i) {
            return continuum_transform(kind, lat.xi[i], dim);
        });
        out.field = inverse(F);
        const cplx offset = interpolate(F, q->center);
        for (auto& v : out.field.samples()) v -= offset;
        return out;
    }
    if (const auto* w = std::get_if<synth::Weierstrass>(&kind)) {
        if (!(w->alpha > 0.0 && w->alpha < 1.0)) throw InvalidArgument("synthesize: weierstrass alpha must lie in (0,1)");
        const int top = std::bit_width(spec.n) - 1 - 2;
        std::mt19937_64 rng(w->phase_seed);
        std::vector<double> theta(static_cast<std::size_t>(top) + 1);
        for (auto& t : theta) t = 2.0 * pi * unit_uniform(rng);
        Field f(spec);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double x = f.position(i)[0];
            double acc = 0.0;
            for (int j = 0; j <= top; ++j) {
                const double freq = std::ldexp(1.0, j) * spec.dual_unit();
                acc += std::pow(2.0, -j * w->alpha) * std::cos(freq * x + theta[static_cast<std::size_t>(j)]);
            }
            f[i] = acc;
        }
        out.field = std::move(f);
        return out;
    }
    if (const auto* g = std::get_if<synth::Gaussian>(&kind)) {
        require_center(g->center, spec);
        if (!(g->width > 0.0)) throw InvalidArgument("synthesize: gaussian width must be positive");
        Field f(spec);
        const double L = spec.length;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const auto x = f.position(i);
            double r2 = 0.0;
            for (int a = 0; a < dim; ++a) {
                const double dx = std::remainder(x[a] - g->center[a], L);
                r2 += dx * dx;
            }
            f[i] = std::exp(-0.5 * r2 / (g->width * g->width));
        }
        out.field = std::move(f);
        return out;
    }
    if (const auto* l = std::get_if<synth::LineDelta>(&kind)) {
        if (l->axis < 0 || l->axis >= dim) throw InvalidArgument("synthesize: line axis out of range");
        if (!(l->offset >= 0.0 && l->offset < spec.length)) throw InvalidArgument("synthesize: line offset outside the box");
        const int other = 1 - l->axis;
        out.field = inverse(spectral_from(spec, [&](const FrequencyLattice& lat, std::size_t i) {
            if (dim == 2 && lat.k[i][other] != 0) return cplx{};
            const double scale = dim == 2 ? spec.length : 1.0;
            return scale * std::polar(1.0, -lat.xi[i][l->axis] * l->offset);
        }));
        return out;
    }
    const auto& p = std::get<synth::PlaneWave>(kind);
    SpectralField F(spec);
    F[F.slot(p.k[0], dim == 2 ? p.k[1] : 0)] = std::pow(spec.length, dim);
    out.field = inverse(F);
    return out;
}

std::array<double, 2> AffineMap::apply(std::array<double, 2> x) const
{
    return {a[0] * x[0] + a[1] * x[1] + b[0], a[2] * x[0] + a[3] * x[1] + b[1]};
}

std::array<double, 2> AffineMap::apply_inverse(std::array<double, 2> y) const
{
    const double D = det();
    if (std::abs(D) < 1e-12) throw InvalidArgument("affine map: singular matrix");
    const double u = y[0] - b[0], v = y[1] - b[1];
    return {(a[3] * u - a[1] * v) / D, (-a[2] * u + a[0] * v) / D};
}

AffineMap AffineMap::rotation_about(std::array<double, 2> pivot, double angle)
{
    const double c = std::cos(angle), s = std::sin(angle);
    AffineMap f;
    f.a = {c, -s, s, c};
    f.b = {pivot[0] - (c * pivot[0] - s * pivot[1]), pivot[1] - (s * pivot[0] + c * pivot[1])};
    return f;
}

SynthResult synthesize_pullback(const SynthKind& kind, const AffineMap& f, const GridSpec& spec)
{
    spec.validate();
    if (spec.dim != 2) throw InvalidArgument("pullback synthesis: only 2D grids");
    const double D = f.det();
    if (std::abs(D) < 1e-12) throw InvalidArgument("pullback synthesis: singular map");
    // A^{-1} b and A^{-T}.
    const auto shift = f.apply_inverse({0.0, 0.0});
    const std::array<double, 2> ainv_b{-shift[0], -shift[1]};
    const std::array<double, 4> ainv_t{f.a[3] / D, -f.a[2] / D, -f.a[1] / D, f.a[0] / D};

    SynthResult out;
    const auto F = spectral_from(spec, [&](const FrequencyLattice& lat, std::size_t i) {
        const auto& xi = lat.xi[i];
        const std::array<double, 2> eta{ainv_t[0] * xi[0] + ainv_t[1] * xi[1], ainv_t[2] * xi[0] + ainv_t[3] * xi[1]};
        if (std::holds_alternative<synth::DeltaDerivative>(kind) && (lat.k[i][0] == -static_cast<long>(spec.n / 2)
                                                                      || lat.k[i][1] == -static_cast<long>(spec.n / 2)))
            return cplx{};
        return continuum_transform(kind, eta, 2) * std::polar(1.0 / std::abs(D), xi[0] * ainv_b[0] + xi[1] * ainv_b[1]);
    });
    out.field = inverse(F);
    if (const auto* q = std::get_if<synth::RadialQuarterPower>(&kind)) {
        const cplx offset = interpolate(F, f.apply_inverse(q->center));
        for (auto& v : out.field.samples()) v -= offset;
    }
    return out;
}

}  // namespace besovwf
