#pragma once

#include "besovwf/grid.hpp"
#include "besovwf/localmeans.hpp"
#include "besovwf/scaling.hpp"

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace besovwf {

using Point = std::array<double, 2>;

/// Open cone {ξ ≠ 0 : angle(ξ, direction) < half_angle}. In 1D only the sign
/// of direction[0] matters.
struct ConeSpec {
    Point direction{1.0, 0.0};
    double half_angle = 20.0 * std::numbers::pi / 180.0;

    static ConeSpec at_angle(double angle, double half_angle = 20.0 * std::numbers::pi / 180.0);
    double angle() const;
    bool contains(Point xi, int dim) const;
    /// Throws InvalidArgument unless |direction| = 1 and 0 < half_angle < π/2.
    void validate() const;
};

/// Smooth bump φ(x) = exp(p - p/(1 - |x - center|²/width²)), φ(center) = max φ = 1.
struct Window {
    Point center{0.0, 0.0};
    double width = 1.0;
    double sharpness = 4.0;

    double operator()(Point x, const GridSpec& spec) const;
};

struct WindowChoice {
    double radius_cells = 0.0;
    /// Only used to certify that the windowed field vanishes numerically.
    bool cap_only = false;
};

struct DetectorConfig {
    int kernel_order = 3;
    double half_angle = 20.0 * std::numbers::pi / 180.0;
    /// Empty selects {6 cells (cap only), N/32 cells, N/8 cells}.
    std::vector<WindowChoice> windows;
    double window_sharpness = 4.0;
    /// Probe frequencies stay above window_factor·N/R lattice units.
    double window_factor = 2.0;
    /// Probe frequencies stay below band_high·Nyquist.
    double band_high = 0.6;
    /// Lower probe bound in lattice units: cone_floor/θ in 2D, band_low_1d in 1D.
    double cone_floor = 14.0;
    double band_low_1d = 8.0;
    /// Smooth radial prefilter: 1 below taper_start·Nyquist, 0 above taper_end·Nyquist.
    double taper_start = 0.7;
    double taper_end = 0.9;
    int steps_per_octave = 4;
    double margin = 0.15;
    /// Evaluate the λ-independent (zero-order) bound; needed for probes with α ≥ 0.
    bool zero_order = false;
    std::vector<double> zero_order_scales{0.75, 1.0, 1.5};
    unsigned threads = 1;

    std::vector<WindowChoice> window_family(const GridSpec& spec) const;
};

struct WindowSlope {
    double radius_cells = 0.0;
    std::optional<double> slope;  ///< empty when the window gives no verdict
};

struct DirectionalFit {
    Point point{0.0, 0.0};
    ConeSpec cone;
    ScalingFit fit;
    /// False when no window produced at least 4 admissible ladder points.
    bool has_verdict = false;
    double verdict_radius_cells = 0.0;
    std::vector<WindowSlope> windows;
    /// Set only when the zero-order bound was evaluated.
    std::optional<bool> zero_order_bounded;
};

enum class Classification { In, Out, Undecided };
std::string to_string(Classification c);

/// IN if slope < α - margin or (α ≥ 0 and the zero-order bound fails); OUT if
/// slope ≥ α + margin; UNDECIDED otherwise or without a verdict.
Classification classify(const DirectionalFit& fit, double alpha, double margin = 0.15);

/// Cone-localized scaling tests for one field. Precomputes the prefiltered
/// spectrum; every test is read-only and safe to run concurrently.
class Detector {
public:
    Detector(const Field& u, DetectorConfig cfg = {});

    const GridSpec& spec() const { return spec_; }
    const DetectorConfig& config() const { return cfg_; }
    const Kernel& kernel() const { return kernel_; }

    /// Runs the window family at one point for each cone; windowed spectra are shared across cones.
    std::vector<DirectionalFit> test_point(Point x, const std::vector<ConeSpec>& cones) const;
    DirectionalFit test(Point x, const ConeSpec& cone) const;

    /// Single-window test over an explicit ladder (no admissible-band filtering).
    DirectionalFit test_window(const Window& w, const ConeSpec& cone, const Kernel& k, const LambdaLadder& ladder) const;

    /// Ladder values admissible for a window of the given radius.
    Vec admissible_ladder(double radius_cells, double probe_eps) const;

private:
    struct Prepared;
    Prepared prepare(const Window& w) const;
    std::optional<ScalingFit> run(const Prepared& p, const ConeSpec& cone, const Kernel& k, const Vec& lambdas,
                                  double cap_threshold) const;
    std::optional<bool> zero_order(Point x, const ConeSpec& cone, double radius_cells) const;

    GridSpec spec_;
    DetectorConfig cfg_;
    Kernel kernel_;
    Kernel plain_;
    FrequencyLattice lattice_;
    Field raw_;
    Field filtered_;
    double umax_ = 0.0;
};

DirectionalFit cone_scaling_test(const Field& u, const Window& w, const ConeSpec& cone, const Kernel& k,
                                 const LambdaLadder& ladder, const DetectorConfig& cfg = {});

/// Fan of cone directions: `count` uniform angles in 2D, {+1, -1} in 1D.
std::vector<ConeSpec> direction_fan(int dim, int count, double half_angle);

struct ScanConfig {
    DetectorConfig detector;
    int fan = 8;
    std::vector<double> alphas;
};

struct WFScanResult {
    GridSpec spec;
    std::vector<Point> points;
    std::vector<ConeSpec> directions;
    /// Point-major: entries[p * directions.size() + d].
    std::vector<DirectionalFit> entries;
    int kernel_order = 0;
    std::vector<WindowChoice> windows;
    double margin = 0.15;

    const DirectionalFit& at(std::size_t point, std::size_t direction) const;
};

/// Enables the zero-order bound when some queried α is ≥ 0.
WFScanResult wf_scan(const Field& u, const std::vector<Point>& points, const ScanConfig& cfg);

/// Fitted slope as the critical exponent; throws NumericalError without a verdict.
double threshold_estimate(const Field& u, Point x, const ConeSpec& cone, const DetectorConfig& cfg = {});

struct UnionViolation {
    Point point;
    double angle = 0.0;
    double alpha = 0.0;
};

struct UnionReport {
    WFScanResult u, v, sum;
    std::vector<UnionViolation> violations;
    bool ok() const { return violations.empty(); }
};

/// Scans u, v and u+v; a violation is an IN entry of u+v where u and v are both OUT.
UnionReport wf_union_check(const Field& u, const Field& v, const std::vector<Point>& points, const ScanConfig& cfg);

/// Every verdict slope at the scanned points is ≥ -d - M - 0.25.
bool compact_order_bound_check(const Field& u, int M, const std::vector<Point>& points, const ScanConfig& cfg);

/// Nearest lattice index of a point along each axis.
std::array<std::size_t, 2> nearest_index(Point x, const GridSpec& spec);

/// CSV rows: i0[,i1], dir-angle, slope, r2, zero_order_bounded, classification (one column per α).
std::string scan_csv(const WFScanResult& scan, const std::vector<double>& alphas);

}  // namespace besovwf
