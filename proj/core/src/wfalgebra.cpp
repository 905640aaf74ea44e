#include "besovwf/wfalgebra.hpp"

#include "besovwf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace besovwf {

using std::numbers::pi;
using json = nlohmann::json;

namespace {

constexpr double kPointTol = 1e-9;

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

RVec normalized(RVec v)
{
    const double n = norm(v);
    if (!(n > 0.0)) throw InvalidArgument("direction must be nonzero");
    for (double& x : v) x /= n;
    return v;
}

double angle(std::span<const double> a, std::span<const double> b)
{
    return std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0));
}

// Unit vector at angle t from unit a, rotating toward b along the great circle.
RVec rotate_toward(const RVec& a, const RVec& b, double t)
{
    RVec w(a.size());
    const double c = dot(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) w[i] = b[i] - c * a[i];
    const double n = norm(w);
    if (n < 1e-14) {
        if (a.size() == 1 || c > 0.0) return a;
        // Antipodal: any orthogonal direction spans the great circle.
        std::fill(w.begin(), w.end(), 0.0);
        w[std::abs(a[0]) < 0.9 ? 0 : 1] = 1.0;
        const double p = dot(w, a);
        for (std::size_t i = 0; i < a.size(); ++i) w[i] -= p * a[i];
        w = normalized(w);
    } else {
        for (double& x : w) x /= n;
    }
    RVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::cos(t) * a[i] + std::sin(t) * w[i];
    return r;
}

bool all_fixed(const PointSet& p)
{
    return std::all_of(p.begin(), p.end(), [](const auto& c) { return c.has_value(); });
}

RVec fixed_point(const PointSet& p)
{
    RVec x;
    for (const auto& c : p) x.push_back(*c);
    return x;
}

PointSet as_point_set(const RVec& x) { return {x.begin(), x.end()}; }

std::optional<PointSet> points_meet(const PointSet& a, const PointSet& b)
{
    if (a.size() != b.size()) throw InvalidArgument("point sets differ in dimension");
    PointSet out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) {
            if (std::abs(*a[i] - *b[i]) > kPointTol * (1.0 + std::abs(*a[i]))) return std::nullopt;
            out[i] = a[i];
        } else {
            out[i] = a[i] ? a[i] : b[i];
        }
    }
    return out;
}

bool block_admits_zero(const DirBlock& b) { return b.kind == DirBlock::Kind::Zero || b.with_zero; }

// A nonzero covector in both blocks (precondition: blocks_meet).
RVec meet_direction(const DirBlock& a, const DirBlock& b)
{
    using K = DirBlock::Kind;
    if (a.kind == K::Cone && b.kind == K::Cone) {
        const double th = angle(a.dir, b.dir);
        return th <= a.half_angle ? b.dir : rotate_toward(a.dir, b.dir, a.half_angle);
    }
    if (a.kind == K::Cone) return a.dir;
    if (b.kind == K::Cone) return b.dir;
    RVec e(static_cast<std::size_t>(a.dim), 0.0);
    e[0] = 1.0;
    return e;
}

const DirBlock& single_block(const WFItem& item, const char* op)
{
    if (item.blocks.size() != 1) throw InvalidArgument(std::string(op) + " needs single-block items");
    return item.blocks.front();
}

// Smallest closed round cone containing two nonzero blocks' conic hull; Full
// when the hull reaches an opening of π.
DirBlock cone_hull(const DirBlock& a, const DirBlock& b)
{
    using K = DirBlock::Kind;
    if (a.kind == K::Zero) return b;
    if (b.kind == K::Zero) return a;
    if (a.kind == K::Full || b.kind == K::Full) return DirBlock::full(a.dim);
    const double th = angle(a.dir, b.dir);
    const double lo = std::min(-a.half_angle, th - b.half_angle);
    const double hi = std::max(a.half_angle, th + b.half_angle);
    if (hi - lo >= pi - 1e-12) return DirBlock::full(a.dim);
    return DirBlock::cone(rotate_toward(a.dir, b.dir, 0.5 * (lo + hi)), 0.5 * (hi - lo));
}

bool same_item(const WFItem& a, const WFItem& b)
{
    if (a.point.size() != b.point.size() || a.blocks.size() != b.blocks.size()) return false;
    for (std::size_t i = 0; i < a.point.size(); ++i) {
        if (a.point[i].has_value() != b.point[i].has_value()) return false;
        if (a.point[i] && std::abs(*a.point[i] - *b.point[i]) > kPointTol) return false;
    }
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        const DirBlock& x = a.blocks[i];
        const DirBlock& y = b.blocks[i];
        if (x.dim != y.dim || x.kind != y.kind || x.with_zero != y.with_zero) return false;
        if (x.kind == DirBlock::Kind::Cone &&
            (std::abs(x.half_angle - y.half_angle) > 1e-12 || angle(x.dir, y.dir) > 1e-12))
            return false;
    }
    return a.alpha == b.alpha && a.zero_section == b.zero_section;
}

void push_unique(std::vector<WFItem>& items, WFItem item)
{
    for (const WFItem& it : items)
        if (same_item(it, item)) return;
    items.push_back(std::move(item));
}

bool supp_bearing(const WFItem& it) { return it.zero_section || it.has_directions(); }

// Matrix helpers for the small linear solves of affine maps.
std::optional<RVec> solve(Matrix m, RVec rhs)
{
    const int n = m.rows;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (std::abs(m(piv, c)) < 1e-14) return std::nullopt;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m.a[c * n + j], m.a[piv * n + j]);
            std::swap(rhs[c], rhs[piv]);
        }
        for (int r = c + 1; r < n; ++r) {
            const double f = m(r, c) / m(c, c);
            for (int j = c; j < n; ++j) m.a[r * n + j] -= f * m(c, j);
            rhs[r] -= f * rhs[c];
        }
    }
    RVec x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[r];
        for (int j = r + 1; j < n; ++j) s -= m(r, j) * x[j];
        x[r] = s / m(r, r);
    }
    return x;
}

double determinant(Matrix m)
{
    const int n = m.rows;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
        if (m(piv, c) == 0.0) return 0.0;
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(m.a[c * n + j], m.a[piv * n + j]);
            det = -det;
        }
        det *= m(c, c);
        for (int r = c + 1; r < n; ++r) {
            const double f = m(r, c) / m(c, c);
            for (int j = c; j < n; ++j) m.a[r * n + j] -= f * m(c, j);
        }
    }
    return det;
}

Matrix multiply(const Matrix& a, const Matrix& b)
{
    if (a.cols != b.rows) throw InvalidArgument("matrix shapes do not compose");
    Matrix c{a.rows, b.cols, RVec(static_cast<std::size_t>(a.rows * b.cols), 0.0)};
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k)
            for (int j = 0; j < b.cols; ++j) c.a[i * b.cols + j] += a(i, k) * b(k, j);
    return c;
}

Matrix gram(const Matrix& a)
{
    Matrix g{a.cols, a.cols, RVec(static_cast<std::size_t>(a.cols * a.cols), 0.0)};
    for (int i = 0; i < a.cols; ++i)
        for (int j = 0; j < a.cols; ++j)
            for (int k = 0; k < a.rows; ++k) g.a[i * a.cols + j] += a(k, i) * a(k, j);
    return g;
}

// Image of a single block under the transpose of an invertible differential.
DirBlock transport_block(const DirBlock& b, const Matrix& jac)
{
    using K = DirBlock::Kind;
    if (b.kind != K::Cone) return b;
    if (b.dim > 2) throw InvalidArgument("pullback of cones is supported in dimension 1 and 2");
    if (b.dim == 1 || b.half_angle == 0.0) {
        DirBlock out = b;
        out.dir = normalized(jac.apply_transpose(b.dir));
        return out;
    }
    const double c = std::cos(b.half_angle), s = std::sin(b.half_angle);
    const RVec r_plus{c * b.dir[0] - s * b.dir[1], s * b.dir[0] + c * b.dir[1]};
    const RVec r_minus{c * b.dir[0] + s * b.dir[1], -s * b.dir[0] + c * b.dir[1]};
    const RVec a = normalized(jac.apply_transpose(r_plus));
    const RVec m = normalized(jac.apply_transpose(r_minus));
    DirBlock out = b;
    out.dir = normalized(RVec{a[0] + m[0], a[1] + m[1]});
    out.half_angle = 0.5 * angle(a, m);
    return out;
}

// Angle between a unit vector and the subspace orthogonal to the columns of A.
std::optional<double> angle_to_conormal(const RVec& dir, const Matrix& a)
{
    if (a.cols >= a.rows) return std::nullopt;  // no conormal directions
    const auto coef = solve(gram(a), a.apply_transpose(dir));
    if (!coef) throw NumericalError("embedding differential is rank deficient");
    const RVec proj = a.apply(*coef);
    RVec perp(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i) perp[i] = dir[i] - proj[i];
    return std::acos(std::clamp(norm(perp), 0.0, 1.0));
}

}  // namespace

// ---- blocks and items ----

DirBlock DirBlock::zero(int dim) { return {dim, Kind::Zero, {}, 0.0, true}; }

DirBlock DirBlock::full(int dim, bool with_zero) { return {dim, Kind::Full, {}, 0.0, with_zero}; }

DirBlock DirBlock::cone(RVec dir, double half_angle, bool with_zero)
{
    const int d = static_cast<int>(dir.size());
    DirBlock b{d, Kind::Cone, normalized(std::move(dir)), half_angle, with_zero};
    b.validate();
    return b;
}

bool DirBlock::contains(std::span<const double> xi, double angle_tol) const
{
    if (static_cast<int>(xi.size()) != dim) throw InvalidArgument("covector slice has the wrong dimension");
    if (norm(xi) == 0.0) return block_admits_zero(*this);
    switch (kind) {
    case Kind::Zero: return false;
    case Kind::Full: return true;
    case Kind::Cone: return angle(xi, dir) <= half_angle + angle_tol;
    }
    return false;
}

DirBlock DirBlock::negated() const
{
    DirBlock b = *this;
    for (double& x : b.dir) x = -x;
    return b;
}

void DirBlock::validate() const
{
    if (dim < 1) throw InvalidArgument("direction block dimension must be positive");
    if (kind == Kind::Cone) {
        if (static_cast<int>(dir.size()) != dim) throw InvalidArgument("cone direction has the wrong dimension");
        if (std::abs(norm(dir) - 1.0) > 1e-9) throw InvalidArgument("cone direction must be a unit vector");
        if (!(half_angle >= 0.0 && half_angle < pi / 2)) throw InvalidArgument("cone half_angle must lie in [0, pi/2)");
    } else if (!dir.empty()) {
        throw InvalidArgument("only cone blocks carry a direction");
    }
}

bool blocks_meet(const DirBlock& a, const DirBlock& b, double angle_tol)
{
    using K = DirBlock::Kind;
    if (a.dim != b.dim) throw InvalidArgument("direction blocks differ in dimension");
    if (a.kind == K::Zero || b.kind == K::Zero) return false;
    if (a.kind == K::Full || b.kind == K::Full) return true;
    return angle(a.dir, b.dir) <= a.half_angle + b.half_angle + angle_tol;
}

bool WFItem::has_directions() const
{
    return std::any_of(blocks.begin(), blocks.end(), [](const DirBlock& b) { return b.allows_nonzero(); });
}

bool WFItem::contains_point(std::span<const double> x, double tol) const
{
    if (x.size() != point.size()) throw InvalidArgument("point has the wrong dimension");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (point[i] && std::abs(*point[i] - x[i]) > tol * (1.0 + std::abs(x[i]))) return false;
    return true;
}

bool WFItem::contains(std::span<const double> x, std::span<const double> xi, double tol) const
{
    if (xi.size() != point.size()) throw InvalidArgument("covector has the wrong dimension");
    if (norm(xi) == 0.0 || !contains_point(x, tol)) return false;
    std::size_t off = 0;
    for (const DirBlock& b : blocks) {
        if (!b.contains(xi.subspan(off, static_cast<std::size_t>(b.dim)))) return false;
        off += static_cast<std::size_t>(b.dim);
    }
    return true;
}

SymbolicWF SymbolicWF::at_level(double a) const
{
    SymbolicWF out{dim, {}, std::nullopt};
    for (const WFItem& it : items)
        if (it.has_directions() && it.alpha < a) out.items.push_back(it);
    return out;
}

double SymbolicWF::threshold(std::span<const double> x, std::span<const double> xi) const
{
    double t = std::numeric_limits<double>::infinity();
    for (const WFItem& it : items)
        if (it.contains(x, xi)) t = std::min(t, it.alpha);
    return t;
}

void SymbolicWF::validate() const
{
    if (dim < 1) throw InvalidArgument("dim must be positive");
    for (const WFItem& it : items) {
        if (it.dim() != dim) throw InvalidArgument("item point has the wrong dimension");
        if (it.blocks.empty()) throw InvalidArgument("item needs at least one direction block");
        int total = 0;
        for (const DirBlock& b : it.blocks) {
            b.validate();
            total += b.dim;
        }
        if (total != dim) throw InvalidArgument("item blocks do not cover the covector dimension");
        if (!std::isfinite(it.alpha)) throw InvalidArgument("item alpha must be finite");
        for (const auto& c : it.point)
            if (c && !std::isfinite(*c)) throw InvalidArgument("item point must be finite");
    }
}

WFItem point_item(const RVec& point, DirBlock block, double alpha, bool zero_section)
{
    return {as_point_set(point), {std::move(block)}, alpha, zero_section};
}

bool Box::contains(std::span<const double> x, double tol) const
{
    if (lo.empty()) return true;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
}

RVec Matrix::apply(std::span<const double> x) const
{
    RVec y(static_cast<std::size_t>(rows), 0.0);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
}

RVec Matrix::apply_transpose(std::span<const double> y) const
{
    RVec x(static_cast<std::size_t>(cols), 0.0);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) x[j] += (*this)(i, j) * y[i];
    return x;
}

// ---- maps ----

DiffeoSpec affine_diffeo(const Matrix& a, const RVec& b, Box domain, Box codomain)
{
    if (a.rows != a.cols || static_cast<int>(b.size()) != a.rows || a.a.size() != static_cast<std::size_t>(a.rows * a.cols))
        throw InvalidArgument("affine map needs a square matrix and a matching offset");
    if (std::abs(determinant(a)) < 1e-8) throw InvalidArgument("affine map is not invertible");
    DiffeoSpec f;
    f.dim_domain = f.dim_codomain = a.rows;
    f.forward = [a, b](const RVec& x) {
        RVec y = a.apply(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
        return y;
    };
    f.inverse = [a, b](const RVec& y) -> std::optional<RVec> {
        RVec r(y);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
        return solve(a, r);
    };
    f.jacobian = [a](const RVec&) { return a; };
    f.domain = std::move(domain);
    f.codomain = std::move(codomain);
    return f;
}

DiffeoSpec linear_embedding(const Matrix& a, const RVec& b, std::vector<RVec> samples)
{
    if (static_cast<int>(b.size()) != a.rows || a.cols > a.rows) throw InvalidArgument("embedding needs rows >= cols");
    if (std::abs(determinant(gram(a))) < 1e-12) throw InvalidArgument("embedding differential must have full rank");
    DiffeoSpec f;
    f.dim_domain = a.cols;
    f.dim_codomain = a.rows;
    f.forward = [a, b](const RVec& t) {
        RVec y = a.apply(t);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
        return y;
    };
    f.inverse = [a, b](const RVec& y) -> std::optional<RVec> {
        RVec r(y);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
        auto t = solve(gram(a), a.apply_transpose(r));
        if (!t) return std::nullopt;
        const RVec back = a.apply(*t);
        for (std::size_t i = 0; i < r.size(); ++i)
            if (std::abs(back[i] - r[i]) > kPointTol * (1.0 + std::abs(y[i]))) return std::nullopt;
        return t;
    };
    f.jacobian = [a](const RVec&) { return a; };
    f.samples = std::move(samples);
    return f;
}

DiffeoSpec compose(const DiffeoSpec& g, const DiffeoSpec& f)
{
    if (f.dim_codomain != g.dim_domain) throw InvalidArgument("maps do not compose");
    DiffeoSpec h;
    h.dim_domain = f.dim_domain;
    h.dim_codomain = g.dim_codomain;
    h.forward = [g, f](const RVec& x) { return g.forward(f.forward(x)); };
    h.inverse = [g, f](const RVec& z) -> std::optional<RVec> {
        const auto y = g.inverse(z);
        if (!y) return std::nullopt;
        return f.inverse(*y);
    };
    h.jacobian = [g, f](const RVec& x) { return multiply(g.jacobian(f.forward(x)), f.jacobian(x)); };
    h.domain = f.domain;
    h.codomain = g.codomain;
    h.samples = f.samples;
    return h;
}

SymbolicWF pullback_wf(const SymbolicWF& wf, const DiffeoSpec& f)
{
    wf.validate();
    if (f.dim_codomain != wf.dim || f.dim_domain != wf.dim)
        throw InvalidArgument("pullback needs a diffeomorphism of the set's dimension");
    SymbolicWF out{f.dim_domain, {}, wf.level};
    for (const WFItem& it : wf.items) {
        if (!all_fixed(it.point)) throw InvalidArgument("pullback needs items at fixed points");
        const RVec y = fixed_point(it.point);
        if (!f.codomain.contains(y)) continue;
        const auto x = f.inverse(y);
        if (!x || !f.domain.contains(*x)) continue;
        const Matrix jac = f.jacobian(*x);
        if (std::abs(determinant(jac)) < 1e-8) throw NumericalError("differential is singular at a pulled-back point");
        WFItem img = it;
        img.point = as_point_set(*x);
        img.blocks = {transport_block(single_block(it, "pullback"), jac)};
        out.items.push_back(std::move(img));
    }
    return out;
}

NormalsReport normals_check(const SymbolicWF& wf, const DiffeoSpec& f)
{
    wf.validate();
    if (f.dim_codomain != wf.dim) throw InvalidArgument("embedding codomain must match the set's dimension");
    NormalsReport rep;
    for (std::size_t i = 0; i < wf.items.size(); ++i) {
        const WFItem& it = wf.items[i];
        if (!it.has_directions()) continue;
        const DirBlock& b = single_block(it, "normals_check");
        std::vector<RVec> params;
        if (all_fixed(it.point)) {
            if (auto x = f.inverse(fixed_point(it.point))) params.push_back(*x);
        }
        for (const RVec& s : f.samples)
            if (it.contains_point(f.forward(s))) params.push_back(s);
        bool meets = false;
        for (const RVec& x : params) {
            const Matrix jac = f.jacobian(x);
            if (b.kind == DirBlock::Kind::Full) {
                meets = jac.cols < jac.rows;
            } else {
                const auto gap = angle_to_conormal(b.dir, jac);
                meets = gap && *gap <= b.half_angle + 1e-9;
            }
            if (meets) break;
        }
        if (!meets) continue;
        (it.alpha <= 0.0 ? rep.blocking : rep.positive).push_back(i);
    }
    rep.ok = rep.blocking.empty();
    if (rep.ok && !rep.positive.empty()) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i : rep.positive) m = std::min(m, wf.items[i].alpha);
        rep.witness_alpha = 0.5 * m;
    }
    return rep;
}

// ---- tensor and product ----

namespace {

// WF^a(S) entries, with the zero covector added when with_zero is set.
std::vector<WFItem> level_entries(const SymbolicWF& s, double a, bool with_zero)
{
    std::vector<WFItem> out;
    for (const WFItem& it : s.items) {
        if (!it.has_directions() || !(it.alpha < a)) continue;
        WFItem e = it;
        if (with_zero)
            for (DirBlock& b : e.blocks) b.with_zero = true;
        out.push_back(std::move(e));
    }
    return out;
}

WFItem zero_entry(const WFItem& it)
{
    return {it.point, {DirBlock::zero(it.dim())}, it.alpha, true};
}

// WF₀(S): every directional item with zero admitted, plus support-only items.
std::vector<WFItem> wf0_entries(const SymbolicWF& s)
{
    std::vector<WFItem> out;
    for (const WFItem& it : s.items) {
        if (it.has_directions()) {
            WFItem e = it;
            for (DirBlock& b : e.blocks) b.with_zero = true;
            out.push_back(std::move(e));
        } else if (it.zero_section) {
            out.push_back(zero_entry(it));
        }
    }
    return out;
}

// WF₀^a(S) = WF^a(S) ∪ supp(S) × {0}.
std::vector<WFItem> wf0_level_entries(const SymbolicWF& s, double a)
{
    std::vector<WFItem> out = level_entries(s, a, true);
    for (const WFItem& it : s.items)
        if (supp_bearing(it) && !(it.has_directions() && it.alpha < a)) out.push_back(zero_entry(it));
    return out;
}

void append_products(std::vector<WFItem>& out, const std::vector<WFItem>& left, const std::vector<WFItem>& right,
                     double gamma)
{
    for (const WFItem& a : left)
        for (const WFItem& b : right) {
            WFItem t;
            t.point = a.point;
            t.point.insert(t.point.end(), b.point.begin(), b.point.end());
            t.blocks = a.blocks;
            t.blocks.insert(t.blocks.end(), b.blocks.begin(), b.blocks.end());
            if (!t.has_directions()) continue;
            t.alpha = gamma;
            t.zero_section = supp_bearing(a) && supp_bearing(b);
            push_unique(out, std::move(t));
        }
}

}  // namespace

SymbolicWF tensor_wf(const SymbolicWF& u, double alpha, const SymbolicWF& v, double beta, TensorForm form)
{
    u.validate();
    v.validate();
    const double gamma = form == TensorForm::Improved ? std::min({alpha, beta, alpha + beta}) : alpha + beta;
    SymbolicWF out{u.dim + v.dim, {}, gamma};
    if (form == TensorForm::Improved) {
        append_products(out.items, level_entries(u, alpha, false), wf0_entries(v), gamma);
        append_products(out.items, wf0_entries(u), level_entries(v, beta, false), gamma);
    } else {
        append_products(out.items, wf0_level_entries(u, alpha), level_entries(v, std::numeric_limits<double>::infinity(), false), gamma);
        append_products(out.items, level_entries(u, std::numeric_limits<double>::infinity(), false), wf0_level_entries(v, beta), gamma);
    }
    for (const WFItem& a : u.items)
        for (const WFItem& b : v.items)
            if (!a.has_directions() && !b.has_directions() && a.zero_section && b.zero_section) {
                WFItem t{a.point, {DirBlock::zero(u.dim), DirBlock::zero(v.dim)}, gamma, true};
                t.point.insert(t.point.end(), b.point.begin(), b.point.end());
                push_unique(out.items, std::move(t));
            }
    return out;
}

namespace {

void append_sums(AlgebraResult& res, const std::vector<WFItem>& left, const std::vector<WFItem>& right, double gamma)
{
    for (const WFItem& a : left)
        for (const WFItem& b : right) {
            const auto p = points_meet(a.point, b.point);
            if (!p) continue;
            const DirBlock& da = single_block(a, "product_wf");
            const DirBlock& db = single_block(b, "product_wf");
            DirBlock hull = cone_hull(da, db);
            hull.with_zero = false;
            if (blocks_meet(da, db.negated())) res.zero_sum_points.push_back(*p);
            push_unique(res.wf.items, WFItem{*p, {hull}, gamma, true});
        }
}

}  // namespace

AlgebraResult product_wf(const SymbolicWF& u, double alpha, const SymbolicWF& v, double beta)
{
    u.validate();
    v.validate();
    if (u.dim != v.dim) throw InvalidArgument("product factors differ in dimension");
    AlgebraResult res;
    if (!(alpha + beta > 0.0)) {
        res.hypothesis_ok = false;
        res.reason = "alpha + beta must be positive";
        return res;
    }
    for (const WFItem& a : u.items) {
        if (!a.has_directions()) continue;
        for (const WFItem& b : v.items) {
            if (!b.has_directions() || a.alpha + b.alpha > 0.0) continue;
            const auto p = points_meet(a.point, b.point);
            if (!p) continue;
            const DirBlock& da = single_block(a, "product_wf");
            const DirBlock nb = single_block(b, "product_wf").negated();
            if (!blocks_meet(da, nb)) continue;
            res.witnesses.push_back({*p, meet_direction(da, nb), a.alpha + b.alpha});
        }
    }
    if (!res.witnesses.empty()) {
        res.hypothesis_ok = false;
        res.reason = "thr_u(x, xi) + thr_v(x, -xi) <= 0 at a shared point";
        return res;
    }
    const double gamma = std::min(alpha, beta);
    res.wf = SymbolicWF{u.dim, {}, gamma};
    append_sums(res, level_entries(u, alpha, false), wf0_entries(v), gamma);
    append_sums(res, wf0_entries(u), level_entries(v, beta, false), gamma);
    for (const WFItem& a : u.items)
        for (const WFItem& b : v.items)
            if (!a.has_directions() && !b.has_directions() && a.zero_section && b.zero_section)
                if (const auto p = points_meet(a.point, b.point))
                    push_unique(res.wf.items, WFItem{*p, {DirBlock::zero(u.dim)}, gamma, true});
    return res;
}

// ---- kernels ----

KernelWF KernelWF::smooth(int dim_x, int dim_y) { return {Kind::Smooth, dim_x, dim_y, 0.0, {}, std::nullopt}; }

KernelWF KernelWF::diagonal(int dim, double alpha) { return {Kind::Diagonal, dim, dim, alpha, {}, std::nullopt}; }

void KernelWF::validate() const
{
    if (dim_x < 1 || dim_y < 1) throw InvalidArgument("kernel dimensions must be positive");
    if (kind == Kind::Diagonal && dim_x != dim_y) throw InvalidArgument("diagonal kernel needs dim_x == dim_y");
    if (!std::isfinite(alpha)) throw InvalidArgument("kernel alpha must be finite");
    auto check = [&](const std::vector<KernelCell>& cs) {
        for (const KernelCell& c : cs) {
            if (static_cast<int>(c.x.size()) != dim_x || c.xi.dim != dim_x) throw InvalidArgument("kernel cell x part has the wrong dimension");
            if (static_cast<int>(c.y.size()) != dim_y || c.eta.dim != dim_y) throw InvalidArgument("kernel cell y part has the wrong dimension");
            c.xi.validate();
            c.eta.validate();
            if (!std::isfinite(c.alpha)) throw InvalidArgument("kernel cell alpha must be finite");
        }
    };
    check(cells);
    if (smooth_cells) check(*smooth_cells);
}

namespace {

// (y, -η) ∈ S-entry for some η in the cell's η block, with η ≠ 0 or (when
// zero_ok) η = 0 over a support point.
bool cell_hits(const KernelCell& c, const WFItem& e, bool zero_ok)
{
    if (!points_meet(c.y, e.point)) return false;
    if (e.has_directions() && blocks_meet(c.eta.negated(), single_block(e, "kernel_compose_wf"))) return true;
    return zero_ok && block_admits_zero(c.eta) && supp_bearing(e);
}

void push_cell_output(AlgebraResult& res, const KernelCell& c, double level)
{
    if (!c.xi.allows_nonzero()) return;
    DirBlock xi = c.xi;
    xi.with_zero = false;
    push_unique(res.wf.items, WFItem{c.x, {xi}, level, false});
}

void push_diagonal_output(AlgebraResult& res, const WFItem& e, double level)
{
    WFItem o = e;
    o.alpha = level;
    o.zero_section = false;
    for (DirBlock& b : o.blocks) b.with_zero = false;
    push_unique(res.wf.items, std::move(o));
}

}  // namespace

AlgebraResult kernel_compose_wf(const KernelWF& k, double alpha1, const SymbolicWF& u, double alpha2,
                                const CompositionOptions& opts)
{
    k.validate();
    u.validate();
    if (k.dim_y != u.dim) throw InvalidArgument("kernel y dimension must match the input's dimension");
    using Kind = KernelWF::Kind;
    AlgebraResult res;
    if (!(alpha1 + alpha2 > 0.0)) {
        res.hypothesis_ok = false;
        res.reason = "alpha1 + alpha2 must be positive";
        return res;
    }
    const std::vector<KernelCell>& smooth = k.smooth_cells ? *k.smooth_cells : k.cells;
    // -WF_{Ω′}(K): cells with ξ = 0 admitted; diagonal and smooth kernels have none.
    if (k.kind == Kind::Cells) {
        for (const KernelCell& c : k.cells) {
            if (!block_admits_zero(c.xi) || !c.eta.allows_nonzero()) continue;
            const DirBlock neg = c.eta.negated();
            for (const WFItem& e : u.items) {
                if (!e.has_directions() || c.alpha + e.alpha > 0.0) continue;
                const auto p = points_meet(c.y, e.point);
                const DirBlock& de = single_block(e, "kernel_compose_wf");
                if (!p || !blocks_meet(neg, de)) continue;
                res.witnesses.push_back({*p, meet_direction(neg, de), c.alpha + e.alpha});
            }
        }
    }
    if (!res.witnesses.empty()) {
        res.hypothesis_ok = false;
        res.reason = "thr_K(y, eta) + thr_u(y, eta) <= 0 on -WF'(K)";
        return res;
    }

    if (opts.smoothing_order) {
        // WF′(K)∘WF^α(u) ∪ WF_Ω(K) bounds WF^{α-γ}(Ku).
        const double level = alpha2 - *opts.smoothing_order;
        res.wf = SymbolicWF{k.dim_x, {}, level};
        const auto in_u = level_entries(u, alpha2, false);
        if (k.kind == Kind::Diagonal) {
            for (const WFItem& e : in_u) push_diagonal_output(res, e, level);
        } else if (k.kind == Kind::Cells) {
            for (const KernelCell& c : smooth) {
                for (const WFItem& e : in_u)
                    if (cell_hits(c, e, false)) push_cell_output(res, c, level);
                if (block_admits_zero(c.eta)) push_cell_output(res, c, level);
            }
        }
        return res;
    }

    // Projection of X ∪ Y at level α₁ + α₂.
    const double level = alpha1 + alpha2;
    res.wf = SymbolicWF{k.dim_x, {}, level};
    const auto wf0_u = wf0_entries(u);
    const auto in_u = level_entries(u, alpha2, false);
    if (k.kind == Kind::Diagonal) {
        if (k.alpha < alpha1)
            for (const WFItem& e : wf0_u)
                if (e.has_directions()) push_diagonal_output(res, e, level);
        for (const WFItem& e : in_u) push_diagonal_output(res, e, level);
    } else if (k.kind == Kind::Cells) {
        for (const KernelCell& c : k.cells) {
            if (!(c.alpha < alpha1)) continue;
            for (const WFItem& e : wf0_u)
                if (cell_hits(c, e, true)) push_cell_output(res, c, level);
        }
        for (const KernelCell& c : smooth)
            for (const WFItem& e : in_u)
                if (cell_hits(c, e, false)) push_cell_output(res, c, level);
    }
    return res;
}

// ---- JSON ----

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where)
{
    if (!j.is_object()) throw InvalidArgument(where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end())
            throw InvalidArgument("unknown key '" + key + "' in " + where);
}

const json& require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key)) throw InvalidArgument("missing key '" + std::string(key) + "' in " + where);
    return j.at(key);
}

double number(const json& j, const std::string& what)
{
    if (!j.is_number()) throw InvalidArgument(what + " must be a number");
    return j.get<double>();
}

json point_json(const PointSet& p)
{
    json a = json::array();
    for (const auto& c : p) a.push_back(c ? json(*c) : json(nullptr));
    return a;
}

PointSet point_from(const json& j, const std::string& what)
{
    if (!j.is_array()) throw InvalidArgument(what + " must be an array");
    PointSet p;
    for (const json& c : j) p.push_back(c.is_null() ? std::nullopt : std::optional<double>(number(c, what)));
    return p;
}

void write_block(json& o, const DirBlock& b)
{
    switch (b.kind) {
    case DirBlock::Kind::Zero:
        o["dir"] = nullptr;
        o["half_angle"] = nullptr;
        break;
    case DirBlock::Kind::Full:
        o["dir"] = nullptr;
        o["half_angle"] = "full";
        break;
    case DirBlock::Kind::Cone:
        o["dir"] = b.dir;
        o["half_angle"] = b.half_angle;
        break;
    }
}

DirBlock read_block(const json& o, int dim, bool with_zero, const std::string& where)
{
    const json& dir = require(o, "dir", where);
    const json& half = require(o, "half_angle", where);
    if (half.is_null()) {
        if (!dir.is_null()) throw InvalidArgument("half_angle null requires dir null in " + where);
        return DirBlock::zero(dim);
    }
    if (half.is_string()) {
        if (half.get<std::string>() != "full") throw InvalidArgument("half_angle must be a number or \"full\" in " + where);
        return DirBlock::full(dim, with_zero);
    }
    if (!dir.is_array()) throw InvalidArgument("dir must be an array in " + where);
    RVec d;
    for (const json& c : dir) d.push_back(number(c, "dir"));
    if (static_cast<int>(d.size()) != dim) throw InvalidArgument("dir has the wrong dimension in " + where);
    return DirBlock::cone(std::move(d), number(half, "half_angle"), with_zero);
}

json block_json(const DirBlock& b)
{
    json o;
    o["dim"] = b.dim;
    write_block(o, b);
    o["with_zero"] = b.with_zero;
    return o;
}

DirBlock block_from(const json& o, const std::string& where)
{
    reject_unknown(o, {"dim", "dir", "half_angle", "with_zero"}, where);
    const json& d = require(o, "dim", where);
    if (!d.is_number_integer()) throw InvalidArgument("dim must be an integer in " + where);
    const bool wz = o.contains("with_zero") ? o.at("with_zero").get<bool>() : false;
    DirBlock b = read_block(o, d.get<int>(), wz, where);
    return b;
}

json item_json(const WFItem& it)
{
    json o;
    o["point"] = point_json(it.point);
    const bool single = it.blocks.size() == 1 && (it.blocks[0].kind == DirBlock::Kind::Zero || !it.blocks[0].with_zero);
    if (single) {
        write_block(o, it.blocks[0]);
    } else {
        json bs = json::array();
        for (const DirBlock& b : it.blocks) bs.push_back(block_json(b));
        o["blocks"] = bs;
    }
    o["alpha"] = it.alpha;
    o["zero_section"] = it.zero_section;
    return o;
}

WFItem item_from(const json& o, int dim, const std::string& where)
{
    reject_unknown(o, {"point", "dir", "half_angle", "blocks", "alpha", "zero_section"}, where);
    WFItem it;
    it.point = point_from(require(o, "point", where), where + ".point");
    if (static_cast<int>(it.point.size()) != dim) throw InvalidArgument(where + ".point has the wrong dimension");
    if (o.contains("blocks")) {
        if (o.contains("dir") || o.contains("half_angle")) throw InvalidArgument(where + " mixes blocks with dir/half_angle");
        for (std::size_t i = 0; i < o.at("blocks").size(); ++i)
            it.blocks.push_back(block_from(o.at("blocks").at(i), where + ".blocks[" + std::to_string(i) + "]"));
    } else {
        it.blocks.push_back(read_block(o, dim, false, where));
    }
    it.alpha = number(require(o, "alpha", where), where + ".alpha");
    if (o.contains("zero_section")) {
        if (!o.at("zero_section").is_boolean()) throw InvalidArgument(where + ".zero_section must be a boolean");
        it.zero_section = o.at("zero_section").get<bool>();
    }
    return it;
}

json cell_json(const KernelCell& c)
{
    return json{{"x", point_json(c.x)}, {"y", point_json(c.y)}, {"xi", block_json(c.xi)},
                {"eta", block_json(c.eta)}, {"alpha", c.alpha}};
}

KernelCell cell_from(const json& o, const std::string& where)
{
    reject_unknown(o, {"x", "y", "xi", "eta", "alpha"}, where);
    KernelCell c;
    c.x = point_from(require(o, "x", where), where + ".x");
    c.y = point_from(require(o, "y", where), where + ".y");
    c.xi = block_from(require(o, "xi", where), where + ".xi");
    c.eta = block_from(require(o, "eta", where), where + ".eta");
    c.alpha = number(require(o, "alpha", where), where + ".alpha");
    return c;
}

json parse(std::string_view text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string to_json(const SymbolicWF& wf)
{
    json o;
    o["dim"] = wf.dim;
    json items = json::array();
    for (const WFItem& it : wf.items) items.push_back(item_json(it));
    o["items"] = items;
    if (wf.level) o["level"] = *wf.level;
    return o.dump();
}

SymbolicWF symbolic_wf_from_json(std::string_view text)
{
    const json o = parse(text);
    reject_unknown(o, {"dim", "items", "level"}, "wavefront set");
    SymbolicWF wf;
    try {
        const json& d = require(o, "dim", "wavefront set");
        if (!d.is_number_integer()) throw InvalidArgument("dim must be an integer");
        wf.dim = d.get<int>();
        const json& items = require(o, "items", "wavefront set");
        if (!items.is_array()) throw InvalidArgument("items must be an array");
        for (std::size_t i = 0; i < items.size(); ++i)
            wf.items.push_back(item_from(items[i], wf.dim, "items[" + std::to_string(i) + "]"));
        if (o.contains("level")) wf.level = number(o.at("level"), "level");
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("wavefront set: ") + e.what());
    }
    wf.validate();
    return wf;
}

std::string to_json(const KernelWF& k)
{
    json o;
    o["dim_x"] = k.dim_x;
    o["dim_y"] = k.dim_y;
    switch (k.kind) {
    case KernelWF::Kind::Smooth: o["kind"] = "smooth"; break;
    case KernelWF::Kind::Diagonal:
        o["kind"] = "diagonal";
        o["alpha"] = k.alpha;
        break;
    case KernelWF::Kind::Cells: {
        o["kind"] = "cells";
        json cs = json::array();
        for (const KernelCell& c : k.cells) cs.push_back(cell_json(c));
        o["cells"] = cs;
        if (k.smooth_cells) {
            json ss = json::array();
            for (const KernelCell& c : *k.smooth_cells) ss.push_back(cell_json(c));
            o["smooth_cells"] = ss;
        }
        break;
    }
    }
    return o.dump();
}

KernelWF kernel_wf_from_json(std::string_view text)
{
    const json o = parse(text);
    reject_unknown(o, {"dim_x", "dim_y", "kind", "alpha", "cells", "smooth_cells"}, "kernel");
    KernelWF k;
    try {
        k.dim_x = require(o, "dim_x", "kernel").get<int>();
        k.dim_y = require(o, "dim_y", "kernel").get<int>();
        const std::string kind = require(o, "kind", "kernel").get<std::string>();
        if (kind == "smooth") {
            k.kind = KernelWF::Kind::Smooth;
        } else if (kind == "diagonal") {
            k.kind = KernelWF::Kind::Diagonal;
            k.alpha = number(require(o, "alpha", "kernel"), "kernel.alpha");
        } else if (kind == "cells") {
            k.kind = KernelWF::Kind::Cells;
            const json& cs = require(o, "cells", "kernel");
            for (std::size_t i = 0; i < cs.size(); ++i) k.cells.push_back(cell_from(cs[i], "cells[" + std::to_string(i) + "]"));
            if (o.contains("smooth_cells")) {
                std::vector<KernelCell> ss;
                const json& sj = o.at("smooth_cells");
                for (std::size_t i = 0; i < sj.size(); ++i) ss.push_back(cell_from(sj[i], "smooth_cells[" + std::to_string(i) + "]"));
                k.smooth_cells = std::move(ss);
            }
        } else {
            throw InvalidArgument("kernel.kind must be smooth, diagonal or cells");
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("kernel: ") + e.what());
    }
    k.validate();
    return k;
}

}  // namespace besovwf
