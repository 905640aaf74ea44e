#pragma once

#include "besovwf/grid.hpp"
#include "besovwf/wavefront.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace besovwf {

/// First-order symbol a = a₁ + a₀ with a₁ homogeneous of degree 1, ξ in
/// physical units. Transport has a(ξ) = v·ξ and HalfWave a(ξ) = |ξ|.
struct MultiplierSymbol {
    enum class Kind { Transport, HalfWave, Custom };

    Kind kind = Kind::HalfWave;
    Point velocity{0.0, 0.0};
    std::function<double(Point)> a1;
    std::function<double(Point)> a0;
    /// Non-smooth symbols are multiplied by χ(|ξ|/floor), χ = 0 below 1 and
    /// 1 above 2, with the floor in lattice frequency units.
    double xi_floor = 2.0;

    static MultiplierSymbol transport(Point v);
    static MultiplierSymbol half_wave();
    /// Throws InvalidArgument when a1 fails degree-1 homogeneity on sample rays.
    static MultiplierSymbol custom(std::function<double(Point)> a1, std::function<double(Point)> a0 = {});

    std::string name() const;
    /// a(ξ) without regularization.
    double value(Point xi) const;
    /// a(ξ)·χ(|ξ|/floor) on the grid's lattice (Transport is left exact).
    double regularized(Point xi, const GridSpec& spec) const;
    /// ∇a(ξ): analytic for Transport and HalfWave, central differences otherwise.
    Point gradient(Point xi) const;
};

/// û(t) = e^{-ita(ξ)} û₀, so singularities travel along x + t∇a(ξ).
Field evolve(const Field& u0, const MultiplierSymbol& a, double t);

struct FlowPoint {
    Point x{0.0, 0.0};
    /// Covector in lattice frequency units.
    Point xi{1.0, 0.0};
};

/// (x, ξ) ↦ (x + t∇a(ξ), ξ) for x-independent symbols; dual_unit converts ξ
/// to physical units for Custom symbols. Throws InvalidArgument when |ξ| is at
/// or below the regularization floor.
FlowPoint hamiltonian_flow(const FlowPoint& p, const MultiplierSymbol& a, double t, double dual_unit = 1.0);

struct PropagationConfig {
    ScanConfig scan;
    std::vector<Point> source_points;
    std::vector<Point> target_points;
    double position_tol_cells = 2.0;
    /// Direction tolerance in fan cells.
    double fan_tol = 1.0;
    /// Angular step used to flow each IN cone of the source.
    double flow_step = 0.5 * std::numbers::pi / 180.0;
};

struct PropagationMismatch {
    Point point;
    double angle = 0.0;
};

struct PropagationReport {
    double alpha = 0.0;
    double level = 0.0;  ///< α - d/2
    WFScanResult source, target;
    std::vector<FlowPoint> flowed;
    /// IN entries of u(t) with no flowed IN nearby.
    std::vector<PropagationMismatch> unexplained;
    /// Flowed INs next to a scanned target point where u(t) has no IN nearby.
    std::vector<PropagationMismatch> missing;
    std::size_t checked_flowed = 0;
    bool ok() const { return unexplained.empty() && missing.empty(); }
};

/// Scans u₀ at α and u(t) at α - d/2, flows the IN cones of u₀ and compares
/// both ways up to the position and fan tolerances (periodic distance).
PropagationReport propagation_check(const Field& u0, const MultiplierSymbol& a, double t, double alpha,
                                    const PropagationConfig& cfg);

struct ExponentEntry {
    Point point;
    double angle = 0.0;
    std::optional<double> before, after;
    bool before_capped = false, after_capped = false;
    bool pass = false;
};

struct ShiftReport {
    double bound = 0.0;  ///< allowed loss: d/2 + 0.25
    std::vector<ExponentEntry> entries;
    bool ok() const;
};

/// threshold(u(t)) ≥ threshold(u₀) - d/2 - 0.25 wherever u₀ has a verdict.
ShiftReport besov_shift_check(const Field& u0, const MultiplierSymbol& a, double t, const std::vector<Point>& points,
                              const std::vector<ConeSpec>& cones, const DetectorConfig& cfg = {});

/// Spectral multiplier e^{-t|ξ|²}. Throws InvalidArgument for t ≤ 0.
Field heat_convolve(const Field& u, double t);

struct SchauderReport {
    double t = 0.0;
    double min_gain = 1.7;
    std::vector<ExponentEntry> entries;
    bool ok() const;
};

/// threshold(Gu) - threshold(u) ≥ min_gain, with a capped Gu counting as a pass
/// and a capped u requiring a capped Gu.
SchauderReport schauder_check(const Field& u, double t, const std::vector<Point>& points,
                              const std::vector<ConeSpec>& cones, const DetectorConfig& cfg = {}, double min_gain = 1.7);

struct EmbeddingReport {
    double alpha = 0.0;
    double norm_inf = 0.0;
    double norm_2 = 0.0;
    /// norm_2 / (norm_inf · L^{d/2}); 0 for the zero field.
    double ratio = 0.0;
    bool ok() const;
};

/// Local-means norms with p = ∞ and p = 2 over the default ladder.
EmbeddingReport compact_embedding_check(const Field& u, double alpha);

}  // namespace besovwf
