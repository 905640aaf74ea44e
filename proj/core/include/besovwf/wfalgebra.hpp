#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace besovwf {

using RVec = std::vector<double>;
/// Point set given per coordinate: a value, or empty for "any value".
using PointSet = std::vector<std::optional<double>>;

/// Direction set over a slice of covector coordinates.
struct DirBlock {
    enum class Kind { Zero, Cone, Full };

    int dim = 1;
    Kind kind = Kind::Full;
    RVec dir;                 ///< unit vector (Cone only)
    double half_angle = 0.0;  ///< closed cone, in [0, π/2) (Cone only)
    bool with_zero = false;   ///< the zero covector also belongs to the block

    static DirBlock zero(int dim);
    static DirBlock full(int dim, bool with_zero = false);
    static DirBlock cone(RVec dir, double half_angle, bool with_zero = false);

    bool allows_nonzero() const { return kind != Kind::Zero; }
    /// Membership of a covector slice; a zero slice belongs iff the block admits zero.
    bool contains(std::span<const double> xi, double angle_tol = 1e-9) const;
    DirBlock negated() const;
    /// Throws InvalidArgument on a malformed block.
    void validate() const;
};

/// Some nonzero covector lies in both blocks.
bool blocks_meet(const DirBlock& a, const DirBlock& b, double angle_tol = 1e-9);

/// (point set) × (product of direction blocks). With threshold semantics the
/// item lies in WF^a for every a > alpha; zero_section marks the point set as
/// part of the support (for the WF₀ variants).
struct WFItem {
    PointSet point;
    std::vector<DirBlock> blocks;
    double alpha = 0.0;
    bool zero_section = false;

    int dim() const { return static_cast<int>(point.size()); }
    /// Some block admits a nonzero covector (the item is not support-only).
    bool has_directions() const;
    bool contains_point(std::span<const double> x, double tol = 1e-9) const;
    /// (x, ξ) with ξ ≠ 0 in the nonzero part of the item.
    bool contains(std::span<const double> x, std::span<const double> xi, double tol = 1e-9) const;
};

struct SymbolicWF {
    int dim = 1;
    std::vector<WFItem> items;
    /// Set on bounds returned by tensor, product and kernel composition: the
    /// items then describe a superset of WF^level and their alpha equals level.
    std::optional<double> level;

    /// Items that lie in WF^a: nonzero directions and alpha < a.
    SymbolicWF at_level(double a) const;
    /// Smallest alpha over items containing (x, ξ); +∞ when none does.
    double threshold(std::span<const double> x, std::span<const double> xi) const;
    bool empty() const { return items.empty(); }
    /// Throws InvalidArgument on dimension mismatches, non-finite thresholds or bad blocks.
    void validate() const;
};

/// Single-cone item at a fixed point.
WFItem point_item(const RVec& point, DirBlock block, double alpha, bool zero_section = true);

struct Box {
    RVec lo, hi;  ///< empty means unbounded
    bool contains(std::span<const double> x, double tol = 1e-9) const;
};

/// Row-major dense matrix.
struct Matrix {
    int rows = 0, cols = 0;
    RVec a;

    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * cols + j)]; }
    RVec apply(std::span<const double> x) const;
    RVec apply_transpose(std::span<const double> y) const;
};

/// Smooth map f from the domain into the codomain with its differential. For
/// diffeomorphisms `inverse` is exact; for embeddings it returns the preimage
/// of points on the image and nothing elsewhere.
struct DiffeoSpec {
    int dim_domain = 2;
    int dim_codomain = 2;
    std::function<RVec(const RVec&)> forward;
    std::function<std::optional<RVec>(const RVec&)> inverse;
    std::function<Matrix(const RVec&)> jacobian;
    Box domain, codomain;
    /// Domain sample points used when an item's point set is not a single point.
    std::vector<RVec> samples;
};

/// x ↦ A x + b with A square and invertible.
DiffeoSpec affine_diffeo(const Matrix& a, const RVec& b, Box domain = {}, Box codomain = {});
/// t ↦ A t + b with A of full column rank (an embedding of dimension A.cols).
DiffeoSpec linear_embedding(const Matrix& a, const RVec& b, std::vector<RVec> samples);
/// g ∘ f.
DiffeoSpec compose(const DiffeoSpec& g, const DiffeoSpec& f);

/// {(x, ᵗdf(x)η) : (f(x), η) ∈ wf}. Cones are carried by their boundary rays,
/// which is exact in dimension 1 and 2; items must be single points with one block.
SymbolicWF pullback_wf(const SymbolicWF& wf, const DiffeoSpec& f);

struct NormalsReport {
    /// Some α > 0 has N_f ∩ WF^α(u) = ∅.
    bool ok = true;
    /// A valid α > 0 when ok.
    double witness_alpha = 1.0;
    /// Items meeting N_f with alpha ≤ 0: they block every α > 0.
    std::vector<std::size_t> blocking;
    /// Items meeting N_f with alpha > 0: they only bound the witness α.
    std::vector<std::size_t> positive;
};

/// Checks N_f = {(f(x), ξ) : ᵗdf(x)ξ = 0} against the items over the image of
/// the embedding's sample points and the preimages of fixed item points.
NormalsReport normals_check(const SymbolicWF& wf, const DiffeoSpec& f);

enum class TensorForm {
    /// WF^γ ⊆ WF^α(u) × WF₀(v) ∪ WF₀(u) × WF^β(v), γ = min{α, β, α+β}.
    Improved,
    /// WF^{α+β} ⊆ WF₀^α(u) × WF(v) ∪ WF(u) × WF₀^β(v).
    Plain,
};

SymbolicWF tensor_wf(const SymbolicWF& u, double alpha, const SymbolicWF& v, double beta,
                     TensorForm form = TensorForm::Improved);

struct Witness {
    PointSet point;
    RVec direction;
    double threshold_sum = 0.0;
};

/// Result of a theorem whose hypothesis may fail.
struct AlgebraResult {
    bool hypothesis_ok = true;
    std::string reason;
    std::vector<Witness> witnesses;
    SymbolicWF wf;
    /// Points where ξ + η = 0 is reachable; the zero covector is dropped there.
    std::vector<PointSet> zero_sum_points;
};

/// Pointwise hypothesis: at every shared (x, ξ), thr_u(x, ξ) + thr_v(x, -ξ) > 0.
/// On success returns the bound at γ = min{α, β}; requires α + β > 0.
AlgebraResult product_wf(const SymbolicWF& u, double alpha, const SymbolicWF& v, double beta);

/// One cell (x, y, ξ, η) of a kernel's wavefront set.
struct KernelCell {
    PointSet x, y;
    DirBlock xi, eta;
    double alpha = 0.0;
};

struct KernelWF {
    enum class Kind { Smooth, Diagonal, Cells };

    Kind kind = Kind::Smooth;
    int dim_x = 1;
    int dim_y = 1;
    /// Diagonal kernels: WF^a = {(x, x, ξ, -ξ)} for a > alpha.
    double alpha = 0.0;
    std::vector<KernelCell> cells;
    /// Smooth wavefront set of a Cells kernel; defaults to every cell.
    std::optional<std::vector<KernelCell>> smooth_cells;

    static KernelWF smooth(int dim_x, int dim_y);
    static KernelWF diagonal(int dim, double alpha);
    void validate() const;
};

struct CompositionOptions {
    /// Set to use the mapping form: WF^{α-γ}(Ku) ⊆ WF′(K)∘WF^α(u) ∪ WF_Ω(K), with α = alpha2.
    std::optional<double> smoothing_order;
};

/// Hypothesis: no (y, η) with thr of -WF_{Ω′}(K) at (y, η) plus thr_u(y, η) ≤ 0.
/// Returns the projection of X ∪ Y at level α₁ + α₂, or the mapping form.
AlgebraResult kernel_compose_wf(const KernelWF& k, double alpha1, const SymbolicWF& u, double alpha2,
                                const CompositionOptions& opts = {});

/// JSON: {dim, items: [{point, dir, half_angle | "full", alpha, zero_section}]}.
/// A null coordinate means "any value"; dir null with half_angle null is a
/// support-only item; items with several blocks carry "blocks" instead.
std::string to_json(const SymbolicWF& wf);
SymbolicWF symbolic_wf_from_json(std::string_view text);
std::string to_json(const KernelWF& k);
KernelWF kernel_wf_from_json(std::string_view text);

}  // namespace besovwf
