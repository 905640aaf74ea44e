#include "cli.hpp"
#include "config.hpp"
#include "recipes.hpp"

#include "besovwf/error.hpp"
#include "besovwf/grid.hpp"
#include "besovwf/io.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/lp.hpp"
#include "besovwf/propagation.hpp"
#include "besovwf/wavefront.hpp"
#include "besovwf/wfalgebra.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace besovwf::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const std::vector<std::string> kCommands{"synth", "norm", "wfscan", "product", "evolve", "flow", "wfalgebra"};

const std::map<std::string, std::set<std::string>> kSections{
    {"synth", {"grid", "object", "output"}},
    {"norm", {"grid", "object", "analysis", "norm"}},
    {"wfscan", {"grid", "object", "analysis", "points", "output"}},
    {"product", {"grid", "analysis", "product"}},
    {"evolve", {"grid", "object", "evolve"}},
    {"flow", {"grid", "flow"}},
    {"wfalgebra", {"wfalgebra"}},
};

const std::set<std::string> kAllSections{"recipe", "grid", "object", "analysis", "points", "output",
                                         "norm", "product", "evolve", "flow", "wfalgebra"};

class HypothesisFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Context {
    std::string command;
    fs::path config_dir;
    fs::path out;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    json config;
    json result = json::object();
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;

    void write_json(const std::string& name, const json& j)
    {
        io::write_text(out / name, j.dump(2) + "\n");
        outputs.push_back(name);
    }
};

// Runs f and rethrows InvalidArgument as a ConfigError under `where`.
template <class F>
auto checked(const std::string& where, F&& f)
{
    try {
        return f();
    } catch (const InvalidArgument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

json point_json(Point x, int dim)
{
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(x[i]);
    return a;
}

json vec_json(const RVec& v) { return json(v); }

Point parse_point(const json& j, const std::string& where, int dim)
{
    const std::vector<double> v = number_array(j, where);
    if (static_cast<int>(v.size()) != dim)
        throw ConfigError(where + ": expected " + std::to_string(dim) + " coordinates");
    return {v[0], dim == 2 ? v[1] : 0.0};
}

// ---------------------------------------------------------------------------
// Sections

GridSpec parse_grid(Reader r)
{
    GridSpec g;
    g.dim = r.integer("dim");
    const int n = r.integer("n");
    if (n <= 0) throw ConfigError(r.key_path("n") + ": must be positive");
    g.n = static_cast<std::size_t>(n);
    g.length = r.number("length", g.length);
    r.finish();
    checked("grid", [&] { g.validate(); });
    return g;
}

Field parse_object(Reader r, const GridSpec& g, const Context& ctx, std::vector<std::string>& warnings,
                   std::string& name)
{
    name = r.string("kind");
    const int d = g.dim;
    auto center = [&] { return r.has("center") ? parse_point(r.raw("center"), r.key_path("center"), d) : g.center(); };

    if (name == "file") {
        fs::path p = r.string("path");
        if (p.is_relative()) p = ctx.config_dir / p;
        r.finish();
        Field f;
        try {
            f = io::read_field(p);
        } catch (const Error& e) {
            throw ConfigError(r.key_path("path") + ": " + e.what());
        }
        if (!(f.spec() == g)) throw ConfigError(r.key_path("path") + ": field grid does not match grid");
        for (const cplx& z : f.samples())
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw ConfigError(r.key_path("path") + ": non-finite samples");
        return f;
    }

    SynthKind kind;
    if (name == "delta") {
        kind = synth::Delta{center()};
    } else if (name == "ddelta") {
        kind = synth::DeltaDerivative{center(), r.integer("axis", 0)};
    } else if (name == "sqrt") {
        kind = synth::RadialQuarterPower{center()};
    } else if (name == "weierstrass") {
        const double alpha = r.number("alpha");
        const int s = r.integer("phase_seed", static_cast<int>(ctx.seed));
        if (s < 0) throw ConfigError(r.key_path("phase_seed") + ": must be non-negative");
        kind = synth::Weierstrass{alpha, static_cast<std::uint64_t>(s)};
    } else if (name == "gaussian") {
        kind = synth::Gaussian{center(), r.number("width", 0.3)};
    } else if (name == "line-delta") {
        kind = synth::LineDelta{r.integer("axis", 0), r.number("offset", std::numbers::pi)};
    } else if (name == "plane-wave") {
        const std::vector<double> k = r.numbers("k");
        if (static_cast<int>(k.size()) != d) throw ConfigError(r.key_path("k") + ": expected " + std::to_string(d) + " entries");
        kind = synth::PlaneWave{{std::lround(k[0]), d == 2 ? std::lround(k[1]) : 0L}};
    } else {
        throw ConfigError(r.key_path("kind") + ": unknown object kind '" + name + "'");
    }

    std::optional<AffineMap> rotation;
    if (r.has("rotation")) {
        Reader rr = r.child("rotation");
        const double angle = rr.number("angle_deg") * kDeg;
        const Point pivot = rr.has("pivot") ? parse_point(rr.raw("pivot"), rr.key_path("pivot"), d) : g.center();
        rr.finish();
        rotation = AffineMap::rotation_about(pivot, angle);
    }
    r.finish();

    SynthResult s = checked(r.path(), [&] {
        return rotation ? synthesize_pullback(kind, *rotation, g) : synthesize(kind, g);
    });
    warnings.insert(warnings.end(), s.warnings.begin(), s.warnings.end());
    return std::move(s.field);
}

struct Analysis {
    ScanConfig scan;
    std::optional<int> kernel_order;
};

Analysis parse_analysis(const json* j, const std::string& path, const GridSpec& g, unsigned threads)
{
    Analysis a;
    a.scan.detector.threads = threads;
    if (!j) return a;
    Reader r(*j, path);
    if (r.has("kernel_order")) {
        a.kernel_order = r.integer("kernel_order");
        a.scan.detector.kernel_order = *a.kernel_order;
    }
    a.scan.fan = r.integer("fan", a.scan.fan);
    if (a.scan.fan < 1) throw ConfigError(r.key_path("fan") + ": must be at least 1");
    a.scan.detector.half_angle = r.number("half_angle_deg", a.scan.detector.half_angle / kDeg) * kDeg;
    a.scan.alphas = r.numbers("alphas", {});
    a.scan.detector.margin = r.number("margin", a.scan.detector.margin);
    if (a.scan.detector.margin < 0.0) throw ConfigError(r.key_path("margin") + ": must be non-negative");
    a.scan.detector.window_factor = r.number("window_factor", a.scan.detector.window_factor);
    if (r.has("windows")) {
        const json& w = r.raw("windows");
        if (!w.is_array() || w.empty()) throw ConfigError(r.key_path("windows") + ": expected a non-empty array");
        for (std::size_t i = 0; i < w.size(); ++i) {
            Reader wr(w[i], r.key_path("windows") + "[" + std::to_string(i) + "]");
            WindowChoice c;
            c.radius_cells = wr.number("radius_cells");
            if (!(c.radius_cells > 0.0) || c.radius_cells > 0.5 * static_cast<double>(g.n))
                throw ConfigError(wr.key_path("radius_cells") + ": must lie in (0, N/2]");
            c.cap_only = wr.boolean("cap_only", false);
            wr.finish();
            a.scan.detector.windows.push_back(c);
        }
    }
    if (r.has("ladder")) {
        Reader lr = r.child("ladder");
        a.scan.detector.steps_per_octave = lr.integer("steps_per_octave", a.scan.detector.steps_per_octave);
        if (a.scan.detector.steps_per_octave < 1)
            throw ConfigError(lr.key_path("steps_per_octave") + ": must be at least 1");
        a.scan.detector.band_high = lr.number("band_high", a.scan.detector.band_high);
        if (!(a.scan.detector.band_high > 0.0 && a.scan.detector.band_high <= 1.0))
            throw ConfigError(lr.key_path("band_high") + ": must lie in (0, 1]");
        lr.finish();
    }
    r.finish();
    checked(path + ".half_angle_deg", [&] { ConeSpec::at_angle(0.0, a.scan.detector.half_angle).validate(); });
    return a;
}

struct PointList {
    std::vector<Point> points;
    std::size_t nx = 0, ny = 0;  ///< set for regular point grids
};

PointList parse_points(const json& j, const std::string& path, const GridSpec& g)
{
    PointList out;
    const double h = g.spacing();
    if (j.is_string()) {
        if (j.get<std::string>() != "center") throw ConfigError(path + ": expected \"center\", a list or an object");
        out.points.push_back(g.center());
        return out;
    }
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            out.points.push_back(parse_point(j[i], path + "[" + std::to_string(i) + "]", g.dim));
        if (out.points.empty()) throw ConfigError(path + ": empty point list");
        return out;
    }
    Reader r(j, path);
    if (r.has("cells")) {
        const json& c = r.raw("cells");
        if (!c.is_array() || c.empty()) throw ConfigError(r.key_path("cells") + ": expected a non-empty array");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const Point p = parse_point(c[i], r.key_path("cells") + "[" + std::to_string(i) + "]", g.dim);
            out.points.push_back({p[0] * h, p[1] * h});
        }
    } else {
        const int step = r.integer("step_cells");
        if (step < 1 || static_cast<std::size_t>(step) > g.n)
            throw ConfigError(r.key_path("step_cells") + ": must lie in [1, N]");
        const int offset = r.integer("offset_cells", 0);
        const std::size_t count = g.n / static_cast<std::size_t>(step);
        out.nx = count;
        out.ny = g.dim == 2 ? count : 1;
        for (std::size_t j1 = 0; j1 < out.ny; ++j1)
            for (std::size_t i0 = 0; i0 < out.nx; ++i0)
                out.points.push_back({static_cast<double>(offset + static_cast<int>(i0) * step) * h,
                                      g.dim == 2 ? static_cast<double>(offset + static_cast<int>(j1) * step) * h : 0.0});
    }
    r.finish();
    return out;
}

MultiplierSymbol parse_symbol(Reader r, int dim)
{
    const std::string kind = r.string("kind");
    MultiplierSymbol a;
    if (kind == "halfwave") {
        a = MultiplierSymbol::half_wave();
    } else if (kind == "transport") {
        a = MultiplierSymbol::transport(parse_point(r.raw("velocity"), r.key_path("velocity"), dim));
    } else {
        throw ConfigError(r.key_path("kind") + ": unknown symbol '" + kind + "'");
    }
    a.xi_floor = r.number("xi_floor", a.xi_floor);
    if (!(a.xi_floor > 0.0)) throw ConfigError(r.key_path("xi_floor") + ": must be positive");
    r.finish();
    return a;
}

std::vector<double> parse_times(Reader& r)
{
    const std::vector<double> t = r.numbers("times");
    if (t.empty()) throw ConfigError(r.key_path("times") + ": empty");
    for (double v : t)
        if (!std::isfinite(v)) throw ConfigError(r.key_path("times") + ": must be finite");
    return t;
}

std::vector<FlowPoint> parse_flow_points(const json& j, const std::string& path, int dim)
{
    if (!j.is_array()) throw ConfigError(path + ": expected an array");
    std::vector<FlowPoint> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        Reader r(j[i], path + "[" + std::to_string(i) + "]");
        FlowPoint p;
        p.x = parse_point(r.raw("x"), r.key_path("x"), dim);
        p.xi = parse_point(r.raw("xi"), r.key_path("xi"), dim);
        r.finish();
        out.push_back(p);
    }
    return out;
}

SymbolicWF parse_wf(const json& j, const std::string& path)
{
    return checked(path, [&] { return symbolic_wf_from_json(j.dump()); });
}

json wf_json(const SymbolicWF& wf) { return json::parse(to_json(wf)); }

// Structural equality with a relative tolerance on numbers.
bool json_close(const json& a, const json& b, double tol = 1e-12)
{
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>(), y = b.get<double>();
        return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
    }
    if (a.type() != b.type() || a.size() != b.size()) return false;
    if (a.is_array()) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!json_close(a[i], b[i], tol)) return false;
        return true;
    }
    if (a.is_object()) {
        for (const auto& [k, v] : a.items())
            if (!b.contains(k) || !json_close(v, b.at(k), tol)) return false;
        return true;
    }
    return a == b;
}

Matrix parse_matrix(const json& j, const std::string& path)
{
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
    Matrix m;
    m.rows = static_cast<int>(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::vector<double> row = number_array(j[i], path + "[" + std::to_string(i) + "]");
        if (i == 0) m.cols = static_cast<int>(row.size());
        if (row.empty() || static_cast<int>(row.size()) != m.cols) throw ConfigError(path + ": ragged or empty rows");
        m.a.insert(m.a.end(), row.begin(), row.end());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Scan reporting

json fit_json(const DirectionalFit& e, int dim, const std::vector<double>& alphas, double margin)
{
    json j;
    j["point"] = point_json(e.point, dim);
    j["angle"] = e.cone.angle();
    j["has_verdict"] = e.has_verdict;
    j["slope"] = e.has_verdict ? json(e.fit.slope) : json(nullptr);
    j["capped"] = e.has_verdict && e.fit.capped;
    j["r_squared"] = e.has_verdict ? json(e.fit.r_squared) : json(nullptr);
    j["verdict_radius_cells"] = e.verdict_radius_cells;
    j["zero_order_bounded"] = e.zero_order_bounded ? json(*e.zero_order_bounded) : json(nullptr);
    json cls = json::array();
    for (double a : alphas) cls.push_back(to_string(classify(e, a, margin)));
    j["classification"] = cls;
    return j;
}

struct PointThreshold {
    std::optional<double> value;
    bool capped = false;
};

// Smallest verdict slope over the directions at point p.
PointThreshold point_threshold(const WFScanResult& s, std::size_t p)
{
    PointThreshold t;
    for (std::size_t d = 0; d < s.directions.size(); ++d) {
        const DirectionalFit& e = s.at(p, d);
        if (!e.has_verdict) continue;
        if (!t.value || e.fit.slope < *t.value) {
            t.value = e.fit.slope;
            t.capped = e.fit.capped;
        }
    }
    return t;
}

void require_verdicts(const WFScanResult& s, const std::string& what)
{
    if (std::none_of(s.entries.begin(), s.entries.end(), [](const DirectionalFit& e) { return e.has_verdict; }))
        throw NumericalError(what + ": no scanned direction produced a verdict");
}

json threshold_json(const PointThreshold& t)
{
    return {{"threshold", t.value ? json(*t.value) : json(nullptr)}, {"capped", t.capped}};
}

// ---------------------------------------------------------------------------
// Commands

struct Sections {
    Reader root;
    const json* get(const std::string& key) { return root.has(key) ? &root.raw(key) : nullptr; }
    const json& need(const std::string& key) { return root.raw(key); }
};

void cmd_synth(Context& ctx, Sections& s)
{
    const GridSpec g = parse_grid(Reader(s.need("grid"), "grid"));
    std::string name;
    const Field u = parse_object(Reader(s.need("object"), "object"), g, ctx, ctx.warnings, name);
    bool csv = true;
    if (const json* o = s.get("output")) {
        Reader r(*o, "output");
        csv = r.boolean("csv", true);
        r.finish();
    }
    io::write_field(ctx.out / "field.bwf", u);
    ctx.outputs.push_back("field.bwf");
    if (csv) {
        io::write_field_csv(ctx.out / "field.csv", u);
        ctx.outputs.push_back("field.csv");
    }
    ctx.result = {{"object", name}, {"samples", u.size()}, {"sup_norm", u.sup_norm()}, {"real", u.is_real()}};
}

void cmd_norm(Context& ctx, Sections& s)
{
    const GridSpec g = parse_grid(Reader(s.need("grid"), "grid"));
    std::string name;
    const Field u = parse_object(Reader(s.need("object"), "object"), g, ctx, ctx.warnings, name);
    const Analysis an = parse_analysis(s.get("analysis"), "analysis", g, ctx.threads);
    Reader r(s.need("norm"), "norm");
    BesovParams prm;
    prm.alpha = r.number("alpha");
    if (r.has("p")) prm.p = extended_number(r.raw("p"), r.key_path("p"));
    if (r.has("q")) prm.q = extended_number(r.raw("q"), r.key_path("q"));
    r.finish();
    if (!(prm.p == 2.0 || std::isinf(prm.p))) throw ConfigError("norm.p: must be 2 or \"inf\"");
    if (!(prm.q == 1.0 || prm.q == 2.0 || std::isinf(prm.q))) throw ConfigError("norm.q: must be 1, 2 or \"inf\"");

    const LPPartition part = build_partition(g);
    const double lp = besov_norm(u, part, prm);
    const Kernel k = make_kernel(an.kernel_order.value_or(std::max(static_cast<int>(std::floor(prm.alpha)), -1)), g.dim);
    const LambdaLadder ladder = default_ladder(g, k, an.scan.detector.band_high);
    const double lm = local_means_norm(u, prm.alpha, k, ladder, prm.p);
    const ScalingFit fit = block_exponent(u, part);
    if (!std::isfinite(lp) || !std::isfinite(lm)) throw NumericalError("norm evaluation produced a non-finite value");

    json report = {
        {"object", name},
        {"alpha", prm.alpha},
        {"p", std::isinf(prm.p) ? json("inf") : json(prm.p)},
        {"q", std::isinf(prm.q) ? json("inf") : json(prm.q)},
        {"lp_norm", lp},
        {"local_means_norm", lm},
        {"kernel_order", k.moment_order()},
        {"block_exponent", {{"slope", fit.slope}, {"capped", fit.capped}, {"r_squared", fit.r_squared}}},
    };
    ctx.write_json("norm.json", report);
    ctx.result = report;
}

void cmd_wfscan(Context& ctx, Sections& s)
{
    const GridSpec g = parse_grid(Reader(s.need("grid"), "grid"));
    std::string name;
    const Field u = parse_object(Reader(s.need("object"), "object"), g, ctx, ctx.warnings, name);
    const Analysis an = parse_analysis(s.get("analysis"), "analysis", g, ctx.threads);
    const PointList pts = s.get("points") ? parse_points(s.need("points"), "points", g) : PointList{{g.center()}};
    bool csv = true, pgm = false;
    if (const json* o = s.get("output")) {
        Reader r(*o, "output");
        csv = r.boolean("csv", true);
        pgm = r.boolean("pgm", false);
        r.finish();
    }
    if (pgm && pts.nx == 0) throw ConfigError("output.pgm: needs points given by step_cells");

    const WFScanResult scan = wf_scan(u, pts.points, an.scan);
    require_verdicts(scan, "wfscan");
    const std::vector<double>& alphas = an.scan.alphas;
    const double margin = scan.margin;

    json entries = json::array();
    for (const DirectionalFit& e : scan.entries) entries.push_back(fit_json(e, g.dim, alphas, margin));
    json windows = json::array();
    for (const WindowChoice& w : scan.windows)
        windows.push_back({{"radius_cells", w.radius_cells}, {"cap_only", w.cap_only}});
    json thresholds = json::array();
    for (std::size_t p = 0; p < scan.points.size(); ++p) {
        json t = threshold_json(point_threshold(scan, p));
        t["point"] = point_json(scan.points[p], g.dim);
        thresholds.push_back(t);
    }
    ctx.write_json("scan.json", {{"object", name},
                                 {"kernel_order", scan.kernel_order},
                                 {"margin", margin},
                                 {"alphas", alphas},
                                 {"windows", windows},
                                 {"entries", entries},
                                 {"thresholds", thresholds}});
    if (csv) {
        io::write_text(ctx.out / "scan.csv", scan_csv(scan, alphas));
        ctx.outputs.push_back("scan.csv");
    }
    if (pgm) {
        std::vector<double> img(pts.points.size());
        const double lo = -g.dim - 2.0, hi = 2.0;
        for (std::size_t p = 0; p < img.size(); ++p) {
            const PointThreshold t = point_threshold(scan, p);
            img[p] = t.value ? std::clamp(*t.value, lo, hi) : hi;
        }
        io::write_pgm(ctx.out / "scan.pgm", pts.nx, pts.ny, img, lo, hi);
        ctx.outputs.push_back("scan.pgm");
    }

    json counts = json::array();
    for (double a : alphas) {
        std::map<std::string, int> c{{"IN", 0}, {"OUT", 0}, {"UNDECIDED", 0}};
        for (const DirectionalFit& e : scan.entries) ++c[to_string(classify(e, a, margin))];
        counts.push_back({{"alpha", a}, {"counts", c}});
    }
    ctx.result = {{"object", name}, {"points", scan.points.size()}, {"directions", scan.directions.size()},
                  {"classification", counts}, {"thresholds", thresholds}};
}

void cmd_product(Context& ctx, Sections& s)
{
    const GridSpec g = parse_grid(Reader(s.need("grid"), "grid"));
    const Analysis an = parse_analysis(s.get("analysis"), "analysis", g, ctx.threads);
    Reader r(s.need("product"), "product");
    std::string lname, rname;
    const Field u = parse_object(r.child("left"), g, ctx, ctx.warnings, lname);
    const Field v = parse_object(r.child("right"), g, ctx, ctx.warnings, rname);
    const double alpha = r.number("alpha");
    const double beta = r.number("beta");
    const PointList pts = r.has("points") ? parse_points(r.raw("points"), r.key_path("points"), g) : PointList{{g.center()}};
    std::optional<AlgebraResult> sym;
    if (r.has("symbolic")) {
        Reader sr = r.child("symbolic");
        const SymbolicWF wl = parse_wf(sr.raw("left"), sr.key_path("left"));
        const SymbolicWF wr = parse_wf(sr.raw("right"), sr.key_path("right"));
        sr.finish();
        sym = checked("product.symbolic", [&] { return product_wf(wl, alpha, wr, beta); });
    }
    r.finish();

    json report = {{"left", lname}, {"right", rname}, {"alpha", alpha}, {"beta", beta}};
    if (sym) {
        json wit = json::array();
        for (const Witness& w : sym->witnesses) {
            json p = json::array();
            for (const auto& c : w.point) p.push_back(c ? json(*c) : json(nullptr));
            wit.push_back({{"point", p}, {"direction", vec_json(w.direction)}, {"threshold_sum", w.threshold_sum}});
        }
        report["hypothesis"] = {{"ok", sym->hypothesis_ok}, {"reason", sym->reason}, {"witnesses", wit}};
        if (sym->hypothesis_ok) report["bound"] = wf_json(sym->wf);
    }
    if (sym && !sym->hypothesis_ok) {
        ctx.write_json("product.json", report);
        ctx.result = report;
        throw HypothesisFailure("product hypothesis fails: " + sym->reason);
    }

    const Field w = multiply(u, v);
    json per_point = json::array();
    std::optional<double> product_threshold;
    const WFScanResult su = wf_scan(u, pts.points, an.scan);
    const WFScanResult sv = wf_scan(v, pts.points, an.scan);
    const WFScanResult sw = wf_scan(w, pts.points, an.scan);
    require_verdicts(sw, "product");
    for (std::size_t p = 0; p < pts.points.size(); ++p) {
        const PointThreshold tw = point_threshold(sw, p);
        if (tw.value) product_threshold = product_threshold ? std::min(*product_threshold, *tw.value) : *tw.value;
        per_point.push_back({{"point", point_json(pts.points[p], g.dim)},
                             {"left", threshold_json(point_threshold(su, p))},
                             {"right", threshold_json(point_threshold(sv, p))},
                             {"product", threshold_json(tw)}});
    }
    report["points"] = per_point;
    report["product_threshold"] = product_threshold ? json(*product_threshold) : json(nullptr);
    ctx.write_json("product.json", report);
    ctx.result = report;
}

json flowed_json(const std::vector<FlowPoint>& pts, const MultiplierSymbol& a, double t, const GridSpec& g)
{
    json out = json::array();
    for (const FlowPoint& p : pts) {
        FlowPoint q = checked("flow point", [&] { return hamiltonian_flow(p, a, t, g.dual_unit()); });
        for (int i = 0; i < g.dim; ++i) {
            q.x[i] = std::fmod(q.x[i], g.length);
            if (q.x[i] < 0.0) q.x[i] += g.length;
        }
        out.push_back({{"x", point_json(q.x, g.dim)}, {"xi", point_json(q.xi, g.dim)}});
    }
    return out;
}

void cmd_evolve(Context& ctx, Sections& s)
{
    const GridSpec g = parse_grid(Reader(s.need("grid"), "grid"));
    std::string name;
    const Field u0 = parse_object(Reader(s.need("object"), "object"), g, ctx, ctx.warnings, name);
    Reader r(s.need("evolve"), "evolve");
    const MultiplierSymbol a = parse_symbol(r.child("symbol"), g.dim);
    const std::vector<double> times = parse_times(r);
    const std::vector<FlowPoint> fp =
        r.has("flow_points") ? parse_flow_points(r.raw("flow_points"), r.key_path("flow_points"), g.dim)
                             : std::vector<FlowPoint>{};
    r.finish();

    json steps = json::array(), flowed = json::array();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Field ut = evolve(u0, a, times[i]);
        const std::string file = "field_t" + std::to_string(i) + ".bwf";
        io::write_field(ctx.out / file, ut);
        ctx.outputs.push_back(file);
        double l2 = 0.0;
        for (const cplx& z : ut.samples()) l2 += std::norm(z);
        l2 = std::sqrt(l2 * std::pow(g.spacing(), g.dim));
        if (!std::isfinite(l2)) throw NumericalError("evolve produced non-finite samples");
        steps.push_back({{"t", times[i]}, {"file", file}, {"sup_norm", ut.sup_norm()}, {"l2_norm", l2}});
        flowed.push_back({{"t", times[i]}, {"points", flowed_json(fp, a, times[i], g)}});
    }
    ctx.write_json("flowed_points.json", {{"symbol", a.name()}, {"flowed", flowed}});
    const json report = {{"object", name}, {"symbol", a.name()}, {"steps", steps}};
    ctx.write_json("evolve.json", report);
    ctx.result = report;
}

void cmd_flow(Context& ctx, Sections& s)
{
    const GridSpec g = parse_grid(Reader(s.need("grid"), "grid"));
    Reader r(s.need("flow"), "flow");
    const MultiplierSymbol a = parse_symbol(r.child("symbol"), g.dim);
    const std::vector<double> times = parse_times(r);
    const std::vector<FlowPoint> fp = parse_flow_points(r.raw("points"), r.key_path("points"), g.dim);
    r.finish();
    json flowed = json::array();
    for (double t : times) flowed.push_back({{"t", t}, {"points", flowed_json(fp, a, t, g)}});
    const json report = {{"symbol", a.name()}, {"flowed", flowed}};
    ctx.write_json("flow.json", report);
    ctx.result = report;
}

void cmd_wfalgebra(Context& ctx, Sections& s)
{
    Reader r(s.need("wfalgebra"), "wfalgebra");
    const std::string op = r.string("operation");
    json report = {{"operation", op}};
    std::optional<AlgebraResult> theorem;

    if (op == "pullback" || op == "normals") {
        const SymbolicWF wf = parse_wf(r.raw("wf"), r.key_path("wf"));
        Reader mr = r.child("map");
        const Matrix m = parse_matrix(mr.raw("matrix"), mr.key_path("matrix"));
        const RVec b = mr.numbers("offset", RVec(static_cast<std::size_t>(m.rows), 0.0));
        if (static_cast<int>(b.size()) != m.rows) throw ConfigError(mr.key_path("offset") + ": length must equal matrix rows");
        if (op == "pullback") {
            mr.finish();
            const DiffeoSpec f = checked("wfalgebra.map", [&] { return affine_diffeo(m, b); });
            const SymbolicWF pulled = checked("wfalgebra", [&] { return pullback_wf(wf, f); });
            report["result"] = wf_json(pulled);
            report["unchanged"] = json_close(wf_json(pulled), wf_json(wf));
        } else {
            std::vector<RVec> samples;
            const json& sj = mr.raw("samples");
            if (!sj.is_array()) throw ConfigError(mr.key_path("samples") + ": expected an array");
            for (std::size_t i = 0; i < sj.size(); ++i)
                samples.push_back(number_array(sj[i], mr.key_path("samples") + "[" + std::to_string(i) + "]"));
            mr.finish();
            const DiffeoSpec f = checked("wfalgebra.map", [&] { return linear_embedding(m, b, samples); });
            const NormalsReport n = checked("wfalgebra", [&] { return normals_check(wf, f); });
            report["ok"] = n.ok;
            report["witness_alpha"] = n.ok ? json(n.witness_alpha) : json(nullptr);
            report["blocking"] = n.blocking;
            report["positive"] = n.positive;
        }
    } else if (op == "tensor" || op == "product") {
        const SymbolicWF u = parse_wf(r.raw("left"), r.key_path("left"));
        const SymbolicWF v = parse_wf(r.raw("right"), r.key_path("right"));
        const double alpha = r.number("alpha");
        const double beta = r.number("beta");
        if (op == "tensor") {
            const std::string form = r.string("form", "improved");
            if (form != "improved" && form != "plain") throw ConfigError(r.key_path("form") + ": expected improved or plain");
            report["result"] = wf_json(checked("wfalgebra", [&] {
                return tensor_wf(u, alpha, v, beta, form == "plain" ? TensorForm::Plain : TensorForm::Improved);
            }));
        } else {
            theorem = checked("wfalgebra", [&] { return product_wf(u, alpha, v, beta); });
        }
    } else if (op == "kernel") {
        const KernelWF k = checked(r.key_path("kernel"), [&] { return kernel_wf_from_json(r.raw("kernel").dump()); });
        const SymbolicWF u = parse_wf(r.raw("wf"), r.key_path("wf"));
        const double a1 = r.number("alpha1");
        const double a2 = r.number("alpha2");
        CompositionOptions opts;
        if (r.has("smoothing_order")) opts.smoothing_order = r.number("smoothing_order");
        theorem = checked("wfalgebra", [&] { return kernel_compose_wf(k, a1, u, a2, opts); });
    } else {
        throw ConfigError(r.key_path("operation") + ": unknown operation '" + op + "'");
    }
    r.finish();

    if (theorem) {
        json wit = json::array();
        for (const Witness& w : theorem->witnesses) {
            json p = json::array();
            for (const auto& c : w.point) p.push_back(c ? json(*c) : json(nullptr));
            wit.push_back({{"point", p}, {"direction", vec_json(w.direction)}, {"threshold_sum", w.threshold_sum}});
        }
        json zs = json::array();
        for (const PointSet& p : theorem->zero_sum_points) {
            json q = json::array();
            for (const auto& c : p) q.push_back(c ? json(*c) : json(nullptr));
            zs.push_back(q);
        }
        report["hypothesis"] = {{"ok", theorem->hypothesis_ok}, {"reason", theorem->reason}, {"witnesses", wit}};
        if (theorem->hypothesis_ok) {
            report["result"] = wf_json(theorem->wf);
            report["zero_sum_points"] = zs;
        }
    }
    ctx.write_json("wfalgebra.json", report);
    ctx.result = report;
    if (theorem && !theorem->hypothesis_ok) throw HypothesisFailure(op + " hypothesis fails: " + theorem->reason);
}

// ---------------------------------------------------------------------------

json load_config(const fs::path& path, const std::string& command)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("--config: cannot open " + path.string());
    json user;
    try {
        user = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("--config: invalid JSON: ") + e.what());
    }
    if (!user.is_object()) throw ConfigError("config: expected a JSON object");

    const std::set<std::string>& allowed = kSections.at(command);
    for (const auto& [key, _] : user.items()) {
        if (!kAllSections.contains(key)) throw ConfigError(key + ": unknown key");
        if (key != "recipe" && !allowed.contains(key))
            throw ConfigError(key + ": not used by command '" + command + "'");
    }
    json merged = json::object();
    if (user.contains("recipe")) {
        if (!user["recipe"].is_string()) throw ConfigError("recipe: expected a string");
        const std::string name = user["recipe"].get<std::string>();
        const json base = recipe(name);
        for (const auto& [key, value] : base.items())
            if (allowed.contains(key)) merged[key] = value;
        if (merged.empty()) throw ConfigError("recipe: '" + name + "' has nothing for command '" + command + "'");
    }
    for (const auto& [key, value] : user.items())
        if (key != "recipe") merged[key] = value;
    return merged;
}

unsigned resolve_threads(std::optional<int> flag)
{
    if (flag) {
        if (*flag < 1) throw ConfigError("--threads: must be at least 1");
        return static_cast<unsigned>(*flag);
    }
    if (const char* env = std::getenv("BESOVWF_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 1024) throw ConfigError("BESOVWF_THREADS: expected a positive integer");
        return static_cast<unsigned>(v);
    }
    return 1;
}

void dispatch(Context& ctx)
{
    Sections s{Reader(ctx.config, "")};
    if (ctx.command == "synth") cmd_synth(ctx, s);
    else if (ctx.command == "norm") cmd_norm(ctx, s);
    else if (ctx.command == "wfscan") cmd_wfscan(ctx, s);
    else if (ctx.command == "product") cmd_product(ctx, s);
    else if (ctx.command == "evolve") cmd_evolve(ctx, s);
    else if (ctx.command == "flow") cmd_flow(ctx, s);
    else cmd_wfalgebra(ctx, s);
    s.root.finish();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Besov wavefront analysis", "besovwf"};
    std::string command, config_path, out_dir;
    std::optional<int> threads;
    std::uint64_t seed = 0;
    app.add_option("command", command, "synth | norm | wfscan | product | evolve | flow | wfalgebra")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app.add_option("--config", config_path, "JSON configuration")->required();
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--threads", threads, "worker threads (default: BESOVWF_THREADS or 1)");
    app.add_option("--seed", seed, "seed for randomized inputs");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "besovwf: " << e.what() << "\n";
        return kConfigError;
    }

    Context ctx;
    ctx.command = command;
    ctx.out = out_dir;
    ctx.seed = seed;
    ctx.config_dir = fs::path(config_path).parent_path();
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec || !fs::is_directory(ctx.out)) {
        err << "besovwf: --out: cannot create directory " << out_dir << "\n";
        return kConfigError;
    }

    int code = kOk;
    std::string status = "ok", message;
    try {
        ctx.threads = resolve_threads(threads);
        ctx.config = load_config(config_path, command);
        dispatch(ctx);
    } catch (const ConfigError& e) {
        code = kConfigError, status = "config-error", message = e.what();
    } catch (const InvalidArgument& e) {
        code = kConfigError, status = "config-error", message = e.what();
    } catch (const NumericalError& e) {
        code = kNumericalFailure, status = "numerical-failure", message = e.what();
    } catch (const HypothesisFailure& e) {
        code = kHypothesisFailure, status = "hypothesis-fail", message = e.what();
    } catch (const Error& e) {
        code = kConfigError, status = "io-error", message = e.what();
    } catch (const std::exception& e) {
        code = kNumericalFailure, status = "numerical-failure", message = e.what();
    }

    json summary = {{"command", command}, {"status", status}, {"exit_code", code}, {"seed", seed},
                    {"config", ctx.config}, {"outputs", ctx.outputs}, {"warnings", ctx.warnings},
                    {"result", ctx.result}};
    if (!message.empty()) summary["message"] = message;
    try {
        io::write_text(ctx.out / "summary.json", summary.dump(2) + "\n");
    } catch (const Error& e) {
        err << "besovwf: " << e.what() << "\n";
        return kConfigError;
    }
    if (code != kOk) err << "besovwf: " << status << ": " << message << "\n";
    else out << "besovwf " << command << ": ok (" << ctx.out.string() << "/summary.json)\n";
    return code;
}

}  // namespace besovwf::cli
