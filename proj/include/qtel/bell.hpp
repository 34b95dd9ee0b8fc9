// Bell basis and Bell-measurement strategies: conditional-flip interaction,
// auxiliary singlet pairs, and consecutive mod-4 parity measurements.
#pragma once

#include <string>
#include <vector>

#include "qtel/state.hpp"

namespace qtel::bell {

enum class BellOutcome { PsiMinus, PsiPlus, PhiMinus, PhiPlus };

inline constexpr BellOutcome kAllBellOutcomes[] = {
    BellOutcome::PsiMinus, BellOutcome::PsiPlus, BellOutcome::PhiMinus, BellOutcome::PhiPlus};

const char* to_string(BellOutcome k);

// Spin sums (sigma_1 + sigma_2) mod 4 take values 0 or 2 only.
struct ParityValue {
    int value = 0;
    explicit ParityValue(int v);
};

enum class ParityAxis { Z, X };
enum class ParityRoute { Direct, SingletAncilla };

// Two-qubit Bell states; index 0 is spin-up.
//   PsiMinus = (|01> - |10>)/sqrt2   PsiPlus = (|01> + |10>)/sqrt2
//   PhiMinus = (|00> - |11>)/sqrt2   PhiPlus = (|00> + |11>)/sqrt2
StateVector bell_state(BellOutcome kind, const std::string& q1 = "q1",
                       const std::string& q2 = "q2");

// Conditional spin flip: flips the second qubit when the first is up.
Operator conditional_spin_flip(const std::string& control, const std::string& target);

// Conditional phase flip: -1 on |up,down> only.
Operator conditional_phase_flip(const std::string& q1, const std::string& q2);

Operator pauli_x(const std::string& q);
Operator pauli_y(const std::string& q);
Operator pauli_z(const std::string& q);
Operator hadamard(const std::string& q);

// Single-qubit bases. x-basis columns are (|0> + |1>)/sqrt2 (outcome 0) and
// (|0> - |1>)/sqrt2 (outcome 1).
MeasurementBasis z_basis(const std::string& q);
MeasurementBasis x_basis(const std::string& q);

struct BellMeasureResult {
    BellOutcome outcome;
    MeasurementBranch branch; // post state on the full input space
};

// Applies the conditional spin flip, then measures q1 in x and q2 in z.
// The four product outcomes map one-to-one onto the Bell basis.
std::vector<BellMeasureResult> bell_measure_interaction(
    const StateVector& s, const std::string& q1, const std::string& q2,
    MeasureMode mode = MeasureMode::enumerate());

struct ParityResult {
    ParityValue parity;
    MeasurementBranch branch;
};

// Measures (sigma_1 + sigma_2) mod 4 along the given axis. Direct projects
// onto the two parity eigenspaces. SingletAncilla couples a fresh singlet
// pair by conditional flips and reads both ancillas in z (same outcomes -> 0,
// different -> 2); the ancillas never appear in the returned states. Both
// routes realize the same projective measurement.
std::vector<ParityResult> parity_measure(const StateVector& s, const std::string& q1,
                                         const std::string& q2, ParityAxis axis,
                                         ParityRoute route,
                                         MeasureMode mode = MeasureMode::enumerate());

// Bell measurement by consecutive z- and x-parity measurements through
// auxiliary singlets. Non-demolition: the pair collapses onto the identified
// Bell state.
std::vector<BellMeasureResult> bell_measure_ancilla(
    const StateVector& s, const std::string& q1, const std::string& q2,
    MeasureMode mode = MeasureMode::enumerate());

// The (Z, X) parity pair identifies the Bell state:
//   (0,0) -> PsiMinus, (0,2) -> PsiPlus, (2,0) -> PhiMinus, (2,2) -> PhiPlus.
// Fixed once by exhaustive enumeration over the four Bell inputs.
BellOutcome bell_from_parities(int z, int x);

// A label based on `base` that does not collide with anything in `space`.
std::string fresh_label(const CompositeSpace& space, const std::string& base);

} // namespace qtel::bell
