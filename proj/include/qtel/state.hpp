// Finite-dimensional composite quantum states: tensor products, unitaries,
// projective measurement with branch enumeration, and fidelity comparison.
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qtel/rng.hpp"

namespace qtel {

using Complex = std::complex<double>;

inline constexpr double kNormTol = 1e-10;    // state / basis normalization
inline constexpr double kUnitaryTol = 1e-10; // U†U = 1 check
inline constexpr double kBranchEps = 1e-14;  // zero-probability branch cutoff

// Dense square complex matrix, row-major. Big enough for the few-qubit gates
// and measurement bases used here; heavy linear algebra lives elsewhere.
struct Matrix {
    int n = 0;
    std::vector<Complex> a;

    Matrix() = default;
    explicit Matrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim) {}

    Complex& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const Complex& operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    static Matrix identity(int dim);
    Matrix adjoint() const;
    Matrix mul(const Matrix& rhs) const;
    bool is_unitary(double tol = kUnitaryTol) const;
};

// Ordered list of named subsystems; the leftmost subsystem varies slowest in
// the flat amplitude index.
class CompositeSpace {
public:
    CompositeSpace() = default;
    CompositeSpace(std::vector<int> dims, std::vector<std::string> labels);

    int num_subsystems() const { return static_cast<int>(dims_.size()); }
    std::int64_t total_dim() const;
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }
    int dim(int axis) const { return dims_[axis]; }
    const std::string& label(int axis) const { return labels_[axis]; }
    int axis(const std::string& label) const;      // throws on unknown label
    bool has_label(const std::string& label) const;
    std::int64_t stride(int axis) const;

    bool operator==(const CompositeSpace& other) const {
        return dims_ == other.dims_ && labels_ == other.labels_;
    }

private:
    std::vector<int> dims_;
    std::vector<std::string> labels_;
};

class StateVector {
public:
    StateVector() = default;
    // Requires a normalized, finite amplitude vector.
    StateVector(CompositeSpace space, std::vector<Complex> amps);

    // Normalizes amps (throws if the norm is numerically zero).
    static StateVector normalized(CompositeSpace space, std::vector<Complex> amps);
    // Basis state |index> of the composite space.
    static StateVector basis(CompositeSpace space, std::int64_t index);

    const CompositeSpace& space() const { return space_; }
    const std::vector<Complex>& amps() const { return amps_; }
    std::int64_t dim() const { return static_cast<std::int64_t>(amps_.size()); }
    double norm() const;

    std::string to_json() const;
    static StateVector from_json(const std::string& text);

private:
    CompositeSpace space_;
    std::vector<Complex> amps_;
};

// Single qubit a|0> + b|1> with the given label.
StateVector make_qubit(const std::string& label, Complex a0, Complex a1);

// Unitary acting on an ordered subset of subsystems. The matrix is expressed
// over the product of the target dims, targets[0] slowest.
struct Operator {
    std::vector<std::string> targets;
    Matrix matrix;
    bool unitary = true;

    Operator() = default;
    Operator(std::vector<std::string> targets_, Matrix m, bool unitary_ = true);
};

// Orthonormal measurement basis over the target subspace. Column k of
// `columns` is the k-th basis vector; `outcome_of[k]` groups columns into
// (possibly degenerate) outcomes. An empty outcome_of means one outcome per
// column.
struct MeasurementBasis {
    std::vector<std::string> targets;
    Matrix columns;
    std::vector<int> outcome_of;

    static MeasurementBasis computational(std::vector<std::string> targets,
                                          const std::vector<int>& dims);
};

struct MeasureMode {
    enum class Kind { Enumerate, Sample, Branch } kind = Kind::Enumerate;
    std::uint64_t seed = 0;
    int k = 0;

    static MeasureMode enumerate() { return {}; }
    static MeasureMode sample(std::uint64_t seed) {
        MeasureMode m;
        m.kind = Kind::Sample;
        m.seed = seed;
        return m;
    }
    static MeasureMode branch(int k) {
        MeasureMode m;
        m.kind = Kind::Branch;
        m.k = k;
        return m;
    }
};

struct MeasurementBranch {
    int outcome = 0;
    double probability = 0.0;
    StateVector post;
};

// Kronecker product; label sets must be disjoint.
StateVector tensor(const StateVector& s1, const StateVector& s2);

// Applies op to the target axes, leaving the rest untouched.
StateVector apply(const Operator& op, const StateVector& s);

// Projective measurement. Enumerate returns every branch with probability
// above kBranchEps in ascending outcome order; sample draws one branch with
// the seeded generator; branch(k) picks the k-th enumerated branch.
std::vector<MeasurementBranch> measure(const StateVector& s, const MeasurementBasis& basis,
                                       MeasureMode mode = MeasureMode::enumerate());

Complex inner_product(const StateVector& s1, const StateVector& s2);

// |<s1|s2>|^2. Spaces must match exactly (same labels, same order).
double fidelity(const StateVector& s1, const StateVector& s2);

// Reorders subsystems to the given label order (a permutation of the labels).
StateVector permute(const StateVector& s, const std::vector<std::string>& new_order);

// Renames a single subsystem.
StateVector relabel(const StateVector& s, const std::string& from, const std::string& to);

// Splits a product state into (factor on `labels`, remainder). Throws if the
// two parts are still entangled beyond tolerance. Used to drop ancillas and
// measured subsystems once they have collapsed.
std::pair<StateVector, StateVector> split_off(const StateVector& s,
                                              const std::vector<std::string>& labels);

// Haar-ish random state (iid complex Gaussian amplitudes, normalized).
StateVector random_state(CompositeSpace space, SplitMix64& rng);

} // namespace qtel
