// Discrete-system teleportation protocols: one-way teleportation through a
// singlet channel, the crossed nonlocal-measurement two-way swap, and the
// atom-cavity pipelines built from resonant/dispersive interactions and
// microwave rotations.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtel/bell.hpp"
#include "qtel/state.hpp"

namespace qtel::proto {

using bell::BellOutcome;

enum class Pauli { None, X, Y, Z };

const char* to_string(Pauli p);
Operator pauli_op(Pauli p, const std::string& label);

enum class BellStrategy { Interaction, Ancilla };

// Outcome -> pi-rotation map completing a protocol; one Pauli per corrected
// subsystem, in the protocol's output-label order.
struct CorrectionRule {
    std::map<std::string, std::vector<Pauli>> entries;
};

struct TeleportBranch {
    std::string outcome;
    double probability = 0.0;
    double fidelity_pre = 0.0;
    double fidelity_post = 0.0;
};

struct TeleportReport {
    std::string protocol;
    std::string mode;
    std::uint64_t seed = 0;
    std::vector<TeleportBranch> branches;
    double mean_fidelity = 0.0;
    std::vector<double> direction_means; // two-output protocols, per direction

    std::string to_json() const;
};

// Ordered step list with time tags; corrections must follow the measurements
// they read.
struct ProtocolStep {
    enum class Kind { Gate, Measure, Correction };
    Kind kind;
    std::string what;
    double time = 0.0;
    std::vector<int> reads;
};

struct ProtocolSchedule {
    std::vector<ProtocolStep> steps;

    int add_gate(std::string what, double time);
    int add_measure(std::string what, double time);
    int add_correction(std::string what, double time, std::vector<int> reads);
    void validate() const; // throws on causality or time-order violations
};

// Atom-cavity gates over (atom, cavity) with |g>=0, |e>=1 for the atom and
// photon number 0/1 for the cavity.
//   ri_gate:  rotation by theta in span{|e0>, |g1>}, identity elsewhere.
//             theta = pi/4 is the "half" pulse |e0> -> (|e0>+|g1>)/sqrt2,
//             theta = pi/2 the full transfer pulse.
//   di_gate:  dispersive conditional phase flip, -1 on |e1> only.
//   r_gate:   microwave-zone rotation of the atom by phi.
Operator ri_gate(const std::string& atom, const std::string& cavity, double theta);
Operator di_gate(const std::string& atom, const std::string& cavity);
Operator r_gate(const std::string& atom, double phi);

enum class ProtocolKind { BbcjpwTeleport, CrossedSwap, CavityTeleport, CavitySwap };

// Searches, per enumerated branch, for the pi rotation(s) that bring every
// probe payload back to fidelity one. Throws if some branch admits no such
// correction.
CorrectionRule derive_corrections(ProtocolKind kind);

// Frozen correction tables (regression-tested against derive_corrections).
const CorrectionRule& bbcjpw_rule();   // PsiMinus -> nothing, PsiPlus -> z, ...
const CorrectionRule& crossed_rule();  // (Z,X) -> rotation applied to both qubits

// One-way teleportation of `payload` (a 2-dimensional subsystem of `input`;
// any other subsystems ride along as references). Prepares a PsiMinus
// channel, Bell-measures payload + near channel qubit with the chosen
// strategy, applies the correction, and reports fidelity of references +
// output against references + original payload.
TeleportReport bbcjpw_teleport(const StateVector& input, const std::string& payload,
                               BellStrategy strategy = BellStrategy::Interaction,
                               MeasureMode mode = MeasureMode::enumerate());

// Two-way teleportation of the states of q1 and q2 through crossed nonlocal
// measurements Z = (s1z(t1)+s2z(t2)) mod 4, X = (s1x(t2)+s2x(t1)) mod 4
// realized with two singlet ancilla pairs; the (Z,X) table rotation is
// applied to both qubits.
TeleportReport crossed_swap_qubits(const StateVector& input, const std::string& q1,
                                   const std::string& q2,
                                   MeasureMode mode = MeasureMode::enumerate());

// Single-cavity pipeline: channel prepared by a half resonant pulse on an
// excited atom, Bell measurement via dispersive interaction + microwave zone
// + detector on the payload atom and an auxiliary readout atom for the
// cavity. gate_error adds a coherent over-rotation to every resonant and
// microwave pulse.
TeleportReport cavity_teleport(const StateVector& input, const std::string& payload,
                               double gate_error = 0.0,
                               MeasureMode mode = MeasureMode::enumerate());

// Two-way pipeline: two cavity-pair channels, crossed dispersive couplings
// with microwave rotations (the final back-rotation of atom1 is deferred
// into the correction stage), and per-cavity auxiliary readout atoms.
// direct_cavity_readout replaces the auxiliary atoms by direct measurements
// of the cavities in the (|0>+-|1>)/sqrt2 basis.
TeleportReport cavity_swap(const StateVector& input, const std::string& atom1,
                           const std::string& atom2,
                           MeasureMode mode = MeasureMode::enumerate(),
                           bool direct_cavity_readout = false);

// Cavity-pair channel (|01>+|10>)/sqrt2, prepared explicitly by flying an
// excited atom through both cavities.
StateVector make_cavity_channel(const std::string& c1, const std::string& c2);

} // namespace qtel::proto
