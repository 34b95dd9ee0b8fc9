#include "qtel/bell.hpp"

#include <cmath>
#include <stdexcept>

namespace qtel::bell {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_qubit(const StateVector& s, const std::string& q) {
    require(s.space().dim(s.space().axis(q)) == 2, "subsystem is not two-dimensional: " + q);
}
} // namespace

const char* to_string(BellOutcome k) {
    switch (k) {
    case BellOutcome::PsiMinus: return "PsiMinus";
    case BellOutcome::PsiPlus: return "PsiPlus";
    case BellOutcome::PhiMinus: return "PhiMinus";
    case BellOutcome::PhiPlus: return "PhiPlus";
    }
    return "?";
}

ParityValue::ParityValue(int v) : value(v) {
    require(v == 0 || v == 2, "parity value must be 0 or 2");
}

StateVector bell_state(BellOutcome kind, const std::string& q1, const std::string& q2) {
    CompositeSpace space({2, 2}, {q1, q2});
    std::vector<Complex> amps(4);
    switch (kind) {
    case BellOutcome::PsiMinus:
        amps[1] = kInvSqrt2;
        amps[2] = -kInvSqrt2;
        break;
    case BellOutcome::PsiPlus:
        amps[1] = kInvSqrt2;
        amps[2] = kInvSqrt2;
        break;
    case BellOutcome::PhiMinus:
        amps[0] = kInvSqrt2;
        amps[3] = -kInvSqrt2;
        break;
    case BellOutcome::PhiPlus:
        amps[0] = kInvSqrt2;
        amps[3] = kInvSqrt2;
        break;
    }
    return StateVector(std::move(space), std::move(amps));
}

Operator conditional_spin_flip(const std::string& control, const std::string& target) {
    Matrix m(4);
    m(1, 0) = 1.0; // |00> -> |01>
    m(0, 1) = 1.0; // |01> -> |00>
    m(2, 2) = 1.0;
    m(3, 3) = 1.0;
    return Operator({control, target}, std::move(m));
}

Operator conditional_phase_flip(const std::string& q1, const std::string& q2) {
    Matrix m = Matrix::identity(4);
    m(1, 1) = -1.0;
    return Operator({q1, q2}, std::move(m));
}

namespace {
Operator one_qubit(const std::string& q, Complex a00, Complex a01, Complex a10, Complex a11) {
    Matrix m(2);
    m(0, 0) = a00;
    m(0, 1) = a01;
    m(1, 0) = a10;
    m(1, 1) = a11;
    return Operator({q}, std::move(m));
}
} // namespace

Operator pauli_x(const std::string& q) { return one_qubit(q, 0, 1, 1, 0); }
Operator pauli_y(const std::string& q) {
    return one_qubit(q, 0, Complex(0, -1), Complex(0, 1), 0);
}
Operator pauli_z(const std::string& q) { return one_qubit(q, 1, 0, 0, -1); }
Operator hadamard(const std::string& q) {
    return one_qubit(q, kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2);
}

MeasurementBasis z_basis(const std::string& q) {
    return MeasurementBasis::computational({q}, {2});
}

MeasurementBasis x_basis(const std::string& q) {
    MeasurementBasis b;
    b.targets = {q};
    b.columns = Matrix(2);
    b.columns(0, 0) = kInvSqrt2;
    b.columns(1, 0) = kInvSqrt2;
    b.columns(0, 1) = kInvSqrt2;
    b.columns(1, 1) = -kInvSqrt2;
    return b;
}

std::string fresh_label(const CompositeSpace& space, const std::string& base) {
    if (!space.has_label(base)) return base;
    for (int i = 0;; ++i) {
        std::string candidate = base + std::to_string(i);
        if (!space.has_label(candidate)) return candidate;
    }
}

std::vector<BellMeasureResult> bell_measure_interaction(const StateVector& s,
                                                        const std::string& q1,
                                                        const std::string& q2,
                                                        MeasureMode mode) {
    require_qubit(s, q1);
    require_qubit(s, q2);
    StateVector t = apply(conditional_spin_flip(q1, q2), s);

    // Joint basis: q1 in x, q2 in z. Outcome k = 2*x + z.
    MeasurementBasis joint;
    joint.targets = {q1, q2};
    joint.columns = Matrix(4);
    const Matrix hx = x_basis(q1).columns;
    for (int x = 0; x < 2; ++x)
        for (int z = 0; z < 2; ++z)
            for (int r1 = 0; r1 < 2; ++r1)
                for (int r2 = 0; r2 < 2; ++r2)
                    joint.columns(2 * r1 + r2, 2 * x + z) = hx(r1, x) * ((r2 == z) ? 1.0 : 0.0);

    // After the flip: (-,up) -> PsiMinus, (+,up) -> PsiPlus,
    //                 (-,down) -> PhiMinus, (+,down) -> PhiPlus.
    auto outcome_map = [](int k) {
        switch (k) {
        case 0: return BellOutcome::PsiPlus;  // (+, up)
        case 1: return BellOutcome::PhiPlus;  // (+, down)
        case 2: return BellOutcome::PsiMinus; // (-, up)
        default: return BellOutcome::PhiMinus;
        }
    };

    std::vector<BellMeasureResult> out;
    for (auto& br : measure(t, joint, mode))
        out.push_back({outcome_map(br.outcome), std::move(br)});
    return out;
}

namespace {

// z-axis parity via the singlet gadget. The conditional flips leave a
// residual sigma_z on the first-coupled qubit (the singlet is antisymmetric);
// it is undone here so the gadget equals the direct projection exactly.
std::vector<ParityResult> parity_singlet_z(const StateVector& s, const std::string& q1,
                                           const std::string& q2, MeasureMode mode) {
    std::string a1 = fresh_label(s.space(), "panc_a");
    std::string a2 = fresh_label(s.space(), "panc_b");
    StateVector t = tensor(s, bell_state(BellOutcome::PsiMinus, a1, a2));
    t = apply(conditional_spin_flip(q1, a1), t);
    t = apply(conditional_spin_flip(q2, a2), t);
    t = apply(pauli_z(q1), t);

    MeasurementBasis readout = MeasurementBasis::computational({a1, a2}, {2, 2});
    readout.outcome_of = {0, 2, 2, 0}; // same outcomes -> 0, different -> 2

    std::vector<ParityResult> out;
    for (auto& br : measure(t, readout, mode)) {
        auto [anc, rest] = split_off(br.post, {a1, a2});
        out.push_back({ParityValue(br.outcome),
                       MeasurementBranch{br.outcome, br.probability, std::move(rest)}});
    }
    return out;
}

} // namespace

std::vector<ParityResult> parity_measure(const StateVector& s, const std::string& q1,
                                         const std::string& q2, ParityAxis axis,
                                         ParityRoute route, MeasureMode mode) {
    require_qubit(s, q1);
    require_qubit(s, q2);

    if (route == ParityRoute::Direct) {
        MeasurementBasis basis;
        basis.targets = {q1, q2};
        if (axis == ParityAxis::Z) {
            basis = MeasurementBasis::computational({q1, q2}, {2, 2});
        } else {
            basis.columns = Matrix(4);
            const Matrix h = x_basis(q1).columns;
            for (int k = 0; k < 4; ++k)
                for (int r1 = 0; r1 < 2; ++r1)
                    for (int r2 = 0; r2 < 2; ++r2)
                        basis.columns(2 * r1 + r2, k) = h(r1, k >> 1) * h(r2, k & 1);
        }
        basis.outcome_of = {2, 0, 0, 2}; // equal spin components sum to +-2

        std::vector<ParityResult> out;
        for (auto& br : measure(s, basis, mode))
            out.push_back({ParityValue(br.outcome), std::move(br)});
        return out;
    }

    if (axis == ParityAxis::Z) return parity_singlet_z(s, q1, q2, mode);

    // x axis: rotate x into z on the pair, run the z gadget, rotate back.
    StateVector t = apply(hadamard(q1), apply(hadamard(q2), s));
    auto results = parity_singlet_z(t, q1, q2, mode);
    for (auto& r : results)
        r.branch.post = apply(hadamard(q1), apply(hadamard(q2), r.branch.post));
    return results;
}

BellOutcome bell_from_parities(int z, int x) {
    if (z == 0 && x == 0) return BellOutcome::PsiMinus;
    if (z == 0 && x == 2) return BellOutcome::PsiPlus;
    if (z == 2 && x == 0) return BellOutcome::PhiMinus;
    if (z == 2 && x == 2) return BellOutcome::PhiPlus;
    throw std::invalid_argument("invalid parity pair");
}

std::vector<BellMeasureResult> bell_measure_ancilla(const StateVector& s, const std::string& q1,
                                                    const std::string& q2, MeasureMode mode) {
    std::vector<BellMeasureResult> all;
    for (const auto& zr : parity_measure(s, q1, q2, ParityAxis::Z, ParityRoute::SingletAncilla)) {
        for (const auto& xr : parity_measure(zr.branch.post, q1, q2, ParityAxis::X,
                                             ParityRoute::SingletAncilla)) {
            BellOutcome kind = bell_from_parities(zr.parity.value, xr.parity.value);
            double p = zr.branch.probability * xr.branch.probability;
            all.push_back({kind, MeasurementBranch{static_cast<int>(kind), p, xr.branch.post}});
        }
    }

    switch (mode.kind) {
    case MeasureMode::Kind::Enumerate:
        return all;
    case MeasureMode::Kind::Sample: {
        SplitMix64 rng(mode.seed);
        double u = rng.uniform(), acc = 0.0;
        for (const auto& r : all) {
            acc += r.branch.probability;
            if (u < acc) return {r};
        }
        return {all.back()};
    }
    case MeasureMode::Kind::Branch:
        if (mode.k < 0 || mode.k >= static_cast<int>(all.size()))
            throw std::invalid_argument("branch index out of range");
        return {all[static_cast<size_t>(mode.k)]};
    }
    return all;
}

} // namespace qtel::bell
