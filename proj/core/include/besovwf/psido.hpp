#pragma once

#include "besovwf/grid.hpp"
#include "besovwf/lp.hpp"
#include "besovwf/wavefront.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace besovwf {

/// Order-0 separable symbol φ(x) ψ(ξ/|ξ|) χ(ξ) φ(y). A missing window means
/// φ ≡ 1, a missing cone means ψ ≡ 1 and chi_inner = 0 means χ ≡ 1.
struct SeparableSymbol {
    std::optional<Window> window;
    /// ψ is a bump in the angle to cone.direction, supported in the open cap.
    std::optional<ConeSpec> cone;
    double dir_sharpness = 1.0;
    /// χ = 0 for |ξ| ≤ a, 1 for |ξ| ≥ 2a, with a in lattice frequency units.
    double chi_inner = 4.0;

    /// Throws InvalidArgument on a non-positive window width or a bad cone.
    void validate(int dim) const;
};

/// ψ(ξ/|ξ|); 0 at ξ = 0 unless ψ ≡ 1.
double dir_cutoff(const SeparableSymbol& sym, Point xi, int dim);
/// χ at |ξ| = modulus, both in lattice units.
double freq_cutoff(const SeparableSymbol& sym, double modulus);
/// Full symbol φ(x) ψ(ξ/|ξ|) χ(ξ) with ξ in lattice units.
double symbol_value(const SeparableSymbol& sym, Point x, Point xi, const GridSpec& spec);

/// φ · F⁻¹[ψχ · F[φu]].
Field apply_localizer(const SeparableSymbol& sym, const Field& u);

/// Fourier multiplier a(ξ) of order m (ξ in physical units).
struct Multiplier {
    std::string name;
    int order = 0;
    std::function<cplx(Point xi)> symbol;
    /// |a(ξ)| ≥ c|ξ|^m for large |ξ|.
    bool elliptic = true;
};

/// ⟨ξ⟩^m = (1 + |ξ|²)^{m/2}.
Multiplier bracket_multiplier(int m);
/// |ξ| (order 1).
Multiplier modulus_multiplier();

Field apply_multiplier(const Multiplier& a, const Field& u);

/// Finite union of cells; each cell is the conjunction of closed balls in
/// position and closed cones in direction. A complemented region is the
/// complement of that union.
struct ConicRegion {
    struct Ball {
        Point center{0.0, 0.0};
        double radius = 0.0;
    };
    struct Cell {
        std::vector<Ball> balls;
        std::vector<ConeSpec> cones;
    };

    int dim = 2;
    std::vector<Cell> cells;
    bool complemented = false;
    /// Position (physical units) and angle (radians) tolerance of the boundary band.
    double position_tol = 0.0;
    double angle_tol = 0.0;

    /// Membership with the boundary band counted as inside.
    bool contains(Point x, Point dir, const GridSpec& spec) const;
    /// True when (x, dir) lies within the tolerance band of a cell boundary.
    bool near_boundary(Point x, Point dir, const GridSpec& spec) const;
    /// Exact for uncomplemented regions; a complemented region is empty only
    /// when some cell is unconstrained.
    bool empty() const;
};

ConicRegion intersect(const ConicRegion& a, const ConicRegion& b);

/// Ell(A) = {φ(x) ≠ 0, ψ(ξ̂) ≠ 0}.
ConicRegion elliptic_set(const SeparableSymbol& sym, int dim);
/// Complement of the elliptic set.
ConicRegion char_set(const SeparableSymbol& sym, int dim);
/// Char of a multiplier: empty for elliptic symbols, everything otherwise.
ConicRegion char_set(const Multiplier& a, int dim);
/// WF′(A): closed support of φ times the closed cap of ψ.
ConicRegion ess_supp(const SeparableSymbol& sym, int dim);

struct MicrolocalityViolation {
    Point point;
    double angle = 0.0;
    double slope = 0.0;
    bool outside_ess_supp = false;
    bool outside_wf_u = false;
};

struct MicrolocalityReport {
    WFScanResult u_scan, au_scan;
    double alpha = 0.0;
    std::vector<MicrolocalityViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Scans u at α and Au at α (order 0). Every IN entry of Au must lie in
/// WF′(A) and next to an IN entry of u, both up to one fan cell in angle
/// and one verdict window radius in position.
MicrolocalityReport microlocality_check(const SeparableSymbol& sym, const Field& u, const std::vector<Point>& points,
                                        double alpha, const ScanConfig& cfg);

struct LocalizerProbe {
    double window_cells = 0.0;
    double half_angle = 0.0;
    ScalingFit fit;
};

struct CrosscheckEntry {
    double alpha = 0.0;
    Classification detector = Classification::Undecided;
    Classification localizer = Classification::Undecided;
    /// Both decided and different.
    bool disagree() const;
};

struct CrosscheckReport {
    Point point;
    ConeSpec cone;
    DirectionalFit detector;
    std::vector<LocalizerProbe> probes;
    std::vector<CrosscheckEntry> entries;
};

struct CrosscheckConfig {
    DetectorConfig detector;
    std::vector<double> window_cells;  ///< empty selects {N/16, N/8, N/4}
    std::vector<double> half_angles{15.0 * std::numbers::pi / 180.0, 25.0 * std::numbers::pi / 180.0};
    int kernel_order = 3;
};

/// Localizer decision per α: IN when every probe slope is below α - margin,
/// OUT when some probe slope is at least α + margin.
Classification localizer_decision(const std::vector<LocalizerProbe>& probes, double alpha, double margin);

/// Builds localizers elliptic at (point, cone direction) over the window and
/// cone families, fits the local-means exponent of each Au and compares the
/// resulting decision with the detector for each α.
CrosscheckReport characterization_crosscheck(const Field& u, Point point, const ConeSpec& cone,
                                             const std::vector<double>& alphas, const CrosscheckConfig& cfg = {});

struct EllipticEntry {
    Point point;
    double angle = 0.0;
    std::optional<double> before;  ///< threshold of u; empty without verdict
    std::optional<double> after;   ///< threshold of Au
    bool pass = false;
};

struct EllipticReport {
    std::string symbol;
    int order = 0;
    double tolerance = 0.3;
    std::vector<EllipticEntry> entries;
    bool ok() const;
};

/// threshold(Au) ≈ threshold(u) - m within the tolerance wherever both have a
/// verdict; capped pairs pass when both are capped.
EllipticReport elliptic_regularity_check(const Multiplier& a, const Field& u, const std::vector<Point>& points,
                                         const std::vector<ConeSpec>& cones, const DetectorConfig& cfg = {},
                                         double tolerance = 0.3);

struct SymbolBoundReport {
    /// ratios[β] = max over outer shells of |∂^β σ|⟨ξ⟩^{|β|} over its max on the first shell.
    std::array<double, 3> ratios{0.0, 0.0, 0.0};
    double limit = 10.0;
    bool ok() const;
};

/// Samples ψχ and its centered finite differences (|β| ≤ 2) along rays.
SymbolBoundReport symbol_bound_check(const SeparableSymbol& sym, const GridSpec& spec, double limit = 10.0);

struct BoundednessReport {
    std::string symbol;
    std::vector<double> ratios;  ///< ‖Au‖_{α-m} / ‖u‖_α per field
    double constant = 0.0;       ///< max ratio
    double spread = 0.0;         ///< max / min ratio
    double spread_limit = 50.0;
    bool ok() const;
};

BoundednessReport boundedness_check(const Multiplier& a, const std::vector<Field>& corpus, double alpha,
                                    double spread_limit = 50.0);

}  // namespace besovwf
