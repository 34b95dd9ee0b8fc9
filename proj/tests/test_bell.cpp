#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "qtel/bell.hpp"
#include "qtel/state.hpp"

using namespace qtel;
using namespace qtel::bell;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

TEST_CASE("bell states have the printed amplitudes") {
    StateVector psim = bell_state(BellOutcome::PsiMinus);
    CHECK(psim.amps()[1].real() == doctest::Approx(kInvSqrt2));
    CHECK(psim.amps()[2].real() == doctest::Approx(-kInvSqrt2));

    StateVector phip = bell_state(BellOutcome::PhiPlus);
    CHECK(phip.amps()[0].real() == doctest::Approx(kInvSqrt2));
    CHECK(phip.amps()[3].real() == doctest::Approx(kInvSqrt2));

    CHECK(std::abs(inner_product(psim, phip)) == doctest::Approx(0.0));
}

TEST_CASE("the four bell states form an orthonormal basis") {
    for (auto k1 : kAllBellOutcomes)
        for (auto k2 : kAllBellOutcomes) {
            Complex g = inner_product(bell_state(k1), bell_state(k2));
            double want = (k1 == k2) ? 1.0 : 0.0;
            CHECK(std::abs(g - Complex(want, 0)) <= 1e-12);
        }
}

TEST_CASE("conditional spin flip rules and involution") {
    auto flip = conditional_spin_flip("a", "b");
    StateVector dd = tensor(make_qubit("a", 0, 1), make_qubit("b", 0, 1));
    CHECK(fidelity(apply(flip, dd), dd) == doctest::Approx(1.0));

    StateVector uu = tensor(make_qubit("a", 1, 0), make_qubit("b", 1, 0));
    StateVector ud = tensor(make_qubit("a", 1, 0), make_qubit("b", 0, 1));
    CHECK(fidelity(apply(flip, uu), ud) == doctest::Approx(1.0));
    CHECK(fidelity(apply(flip, apply(flip, uu)), uu) == doctest::Approx(1.0));
}

TEST_CASE("phase flip equals spin flip conjugated by the z<->x change") {
    // 4x4 matrix identity: (1 x H) flip (1 x H) = phase flip
    Matrix h2(4);
    const double s = kInvSqrt2;
    // 1 (x) H with the first qubit slowest
    h2(0, 0) = s; h2(0, 1) = s; h2(1, 0) = s; h2(1, 1) = -s;
    h2(2, 2) = s; h2(2, 3) = s; h2(3, 2) = s; h2(3, 3) = -s;

    Matrix lhs = h2.mul(conditional_spin_flip("a", "b").matrix).mul(h2);
    Matrix rhs = conditional_phase_flip("a", "b").matrix;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(lhs(i, j) - rhs(i, j)) <= 1e-12);

    StateVector ud = tensor(make_qubit("a", 1, 0), make_qubit("b", 0, 1));
    StateVector t = apply(conditional_phase_flip("a", "b"), ud);
    CHECK(t.amps()[1].real() == doctest::Approx(-1.0));
    StateVector du = tensor(make_qubit("a", 0, 1), make_qubit("b", 1, 0));
    CHECK(fidelity(apply(conditional_phase_flip("a", "b"), du), du) == doctest::Approx(1.0));
}

TEST_CASE("spin flip maps the bell basis to the printed product states") {
    auto flip = conditional_spin_flip("q1", "q2");
    StateVector minus_up = tensor(make_qubit("q1", kInvSqrt2, -kInvSqrt2), make_qubit("q2", 1, 0));
    StateVector plus_up = tensor(make_qubit("q1", kInvSqrt2, kInvSqrt2), make_qubit("q2", 1, 0));
    StateVector minus_dn = tensor(make_qubit("q1", kInvSqrt2, -kInvSqrt2), make_qubit("q2", 0, 1));
    StateVector plus_dn = tensor(make_qubit("q1", kInvSqrt2, kInvSqrt2), make_qubit("q2", 0, 1));

    auto diff = [](const StateVector& a, const StateVector& b) {
        double d = 0.0;
        for (size_t i = 0; i < a.amps().size(); ++i) d = std::max(d, std::abs(a.amps()[i] - b.amps()[i]));
        return d;
    };
    CHECK(diff(apply(flip, bell_state(BellOutcome::PsiMinus)), minus_up) <= 1e-12);
    CHECK(diff(apply(flip, bell_state(BellOutcome::PsiPlus)), plus_up) <= 1e-12);
    CHECK(diff(apply(flip, bell_state(BellOutcome::PhiMinus)), minus_dn) <= 1e-12);
    CHECK(diff(apply(flip, bell_state(BellOutcome::PhiPlus)), plus_dn) <= 1e-12);
}

TEST_CASE("interaction bell measurement identifies each bell state") {
    for (auto kind : kAllBellOutcomes) {
        auto results = bell_measure_interaction(bell_state(kind), "q1", "q2");
        REQUIRE(results.size() == 1);
        CHECK(results[0].outcome == kind);
        CHECK(results[0].branch.probability == doctest::Approx(1.0));
    }
}

TEST_CASE("interaction bell measurement on a superposition of bell states") {
    StateVector psim = bell_state(BellOutcome::PsiMinus);
    StateVector phip = bell_state(BellOutcome::PhiPlus);
    std::vector<Complex> amps(4);
    for (int i = 0; i < 4; ++i) amps[i] = (psim.amps()[i] + phip.amps()[i]) * kInvSqrt2;
    StateVector s(psim.space(), amps);

    std::map<BellOutcome, double> probs;
    for (const auto& r : bell_measure_interaction(s, "q1", "q2"))
        probs[r.outcome] = r.branch.probability;
    REQUIRE(probs.size() == 2);
    CHECK(probs[BellOutcome::PsiMinus] == doctest::Approx(0.5));
    CHECK(probs[BellOutcome::PhiPlus] == doctest::Approx(0.5));
}

TEST_CASE("z parity of product and bell states") {
    StateVector ud = tensor(make_qubit("q1", 1, 0), make_qubit("q2", 0, 1));
    auto res = parity_measure(ud, "q1", "q2", ParityAxis::Z, ParityRoute::Direct);
    REQUIRE(res.size() == 1);
    CHECK(res[0].parity.value == 0);
    CHECK(res[0].branch.probability == doctest::Approx(1.0));

    auto res2 = parity_measure(bell_state(BellOutcome::PhiPlus), "q1", "q2", ParityAxis::Z,
                               ParityRoute::SingletAncilla);
    REQUIRE(res2.size() == 1);
    CHECK(res2[0].parity.value == 2);
    CHECK(res2[0].branch.probability == doctest::Approx(1.0));
}

TEST_CASE("ancilla and direct parity routes agree on random states") {
    SplitMix64 rng(101);
    for (int i = 0; i < 100; ++i) {
        StateVector s = random_state(CompositeSpace({2, 2}, {"q1", "q2"}), rng);
        for (ParityAxis axis : {ParityAxis::Z, ParityAxis::X}) {
            auto direct = parity_measure(s, "q1", "q2", axis, ParityRoute::Direct);
            auto gadget = parity_measure(s, "q1", "q2", axis, ParityRoute::SingletAncilla);
            REQUIRE(direct.size() == gadget.size());
            for (size_t b = 0; b < direct.size(); ++b) {
                CHECK(direct[b].parity.value == gadget[b].parity.value);
                CHECK(std::abs(direct[b].branch.probability - gadget[b].branch.probability) <= 1e-10);
                CHECK(fidelity(direct[b].branch.post, gadget[b].branch.post) >= 1.0 - 1e-10);
            }
        }
    }
}

TEST_CASE("parity axes commute as channels on bell states") {
    for (auto kind : kAllBellOutcomes) {
        StateVector s = bell_state(kind);
        std::map<std::pair<int, int>, double> zx, xz;
        for (const auto& zr : parity_measure(s, "q1", "q2", ParityAxis::Z, ParityRoute::Direct))
            for (const auto& xr : parity_measure(zr.branch.post, "q1", "q2", ParityAxis::X,
                                                 ParityRoute::Direct))
                zx[{zr.parity.value, xr.parity.value}] +=
                    zr.branch.probability * xr.branch.probability;
        for (const auto& xr : parity_measure(s, "q1", "q2", ParityAxis::X, ParityRoute::Direct))
            for (const auto& zr : parity_measure(xr.branch.post, "q1", "q2", ParityAxis::Z,
                                                 ParityRoute::Direct))
                xz[{zr.parity.value, xr.parity.value}] +=
                    zr.branch.probability * xr.branch.probability;
        for (const auto& [key, p] : zx) CHECK(std::abs(p - xz[key]) <= 1e-10);
    }
}

TEST_CASE("parity pairs identify the bell states per the fixed dictionary") {
    std::map<BellOutcome, std::pair<int, int>> seen;
    for (auto kind : kAllBellOutcomes) {
        auto zres = parity_measure(bell_state(kind), "q1", "q2", ParityAxis::Z,
                                   ParityRoute::SingletAncilla);
        REQUIRE(zres.size() == 1);
        auto xres = parity_measure(zres[0].branch.post, "q1", "q2", ParityAxis::X,
                                   ParityRoute::SingletAncilla);
        REQUIRE(xres.size() == 1);
        seen[kind] = {zres[0].parity.value, xres[0].parity.value};
        CHECK(bell_from_parities(zres[0].parity.value, xres[0].parity.value) == kind);
    }
    CHECK(seen[BellOutcome::PsiMinus] == std::pair<int, int>{0, 0});
    CHECK(seen[BellOutcome::PhiPlus].first == 2);
    // all four pairs distinct
    CHECK(seen.size() == 4);
}

TEST_CASE("ancilla bell measurement is non-demolition on bell states") {
    for (auto kind : kAllBellOutcomes) {
        auto res = bell_measure_ancilla(bell_state(kind), "q1", "q2");
        REQUIRE(res.size() == 1);
        CHECK(res[0].outcome == kind);
        CHECK(fidelity(res[0].branch.post, bell_state(kind)) >= 1.0 - 1e-10);
    }
}

TEST_CASE("interaction and ancilla strategies give the same statistics") {
    SplitMix64 rng(202);
    for (int i = 0; i < 40; ++i) {
        StateVector s = random_state(CompositeSpace({2, 2, 2}, {"q1", "q2", "spec"}), rng);
        std::map<BellOutcome, double> pi, pa;
        std::map<BellOutcome, StateVector> spec_i, spec_a;
        for (const auto& r : bell_measure_interaction(s, "q1", "q2")) {
            pi[r.outcome] = r.branch.probability;
            spec_i.emplace(r.outcome, split_off(r.branch.post, {"q1", "q2"}).second);
        }
        for (const auto& r : bell_measure_ancilla(s, "q1", "q2")) {
            pa[r.outcome] = r.branch.probability;
            spec_a.emplace(r.outcome, split_off(r.branch.post, {"q1", "q2"}).second);
        }
        for (auto kind : kAllBellOutcomes) {
            CHECK(std::abs(pi[kind] - pa[kind]) <= 1e-10);
            if (pi[kind] > 1e-12)
                CHECK(fidelity(spec_i.at(kind), spec_a.at(kind)) >= 1.0 - 1e-10);
        }
    }
}
