#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "qtel/bell.hpp"
#include "qtel/protocols.hpp"
#include "qtel/state.hpp"

using namespace qtel;
using namespace qtel::proto;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kPi = 3.14159265358979323846;

StateVector random_payload(SplitMix64& rng, const std::string& label) {
    return random_state(CompositeSpace({2}, {label}), rng);
}
} // namespace

TEST_CASE("cavity gate algebra") {
    // half pulse on |e0>
    StateVector e0 = tensor(make_qubit("at", 0, 1), make_qubit("cv", 1, 0));
    StateVector g1 = tensor(make_qubit("at", 1, 0), make_qubit("cv", 0, 1));
    StateVector half = apply(ri_gate("at", "cv", kPi / 4), e0);
    CHECK(std::abs(half.amps()[1] - Complex(kInvSqrt2, 0)) <= 1e-12); // |g1>
    CHECK(std::abs(half.amps()[2] - Complex(kInvSqrt2, 0)) <= 1e-12); // |e0>

    // full transfer pulse moves |g1> to -|e0> and fixes |g0>
    StateVector moved = apply(ri_gate("at", "cv", kPi / 2), g1);
    CHECK(std::abs(moved.amps()[2] + 1.0) <= 1e-12);
    StateVector g0 = tensor(make_qubit("at", 1, 0), make_qubit("cv", 1, 0));
    CHECK(fidelity(apply(ri_gate("at", "cv", kPi / 2), g0), g0) == doctest::Approx(1.0));

    // RI restricted to span{|e0>,|g1>} is a rotation: angles compose
    StateVector once = apply(ri_gate("at", "cv", 0.3), apply(ri_gate("at", "cv", 0.4), e0));
    StateVector direct = apply(ri_gate("at", "cv", 0.7), e0);
    CHECK(fidelity(once, direct) >= 1.0 - 1e-12);

    // RI is identity on |e1>
    StateVector e1 = tensor(make_qubit("at", 0, 1), make_qubit("cv", 0, 1));
    CHECK(fidelity(apply(ri_gate("at", "cv", 1.234), e1), e1) == doctest::Approx(1.0));

    // DI squares to the identity
    SplitMix64 rng(5);
    StateVector s = random_state(CompositeSpace({2, 2}, {"at", "cv"}), rng);
    CHECK(fidelity(apply(di_gate("at", "cv"), apply(di_gate("at", "cv"), s)), s) >=
          1.0 - 1e-12);
    CHECK(apply(di_gate("at", "cv"), e1).amps()[3].real() == doctest::Approx(-1.0));
}

TEST_CASE("cavity channel preparation yields (|01>+|10>)/sqrt2") {
    StateVector chan = make_cavity_channel("c1", "c2");
    std::vector<Complex> want(4);
    want[1] = kInvSqrt2;
    want[2] = kInvSqrt2;
    CHECK(fidelity(chan, StateVector(chan.space(), want)) >= 1.0 - 1e-10);
}

TEST_CASE("bbcjpw teleports the up state through the PsiMinus branch untouched") {
    auto report = bbcjpw_teleport(make_qubit("in", 1, 0), "in");
    REQUIRE(report.branches.size() == 4);
    for (const auto& b : report.branches) {
        CHECK(b.probability == doctest::Approx(0.25));
        CHECK(b.fidelity_post >= 1.0 - 1e-10);
        if (b.outcome == "PsiMinus") CHECK(b.fidelity_pre >= 1.0 - 1e-10); // no correction needed
    }
    CHECK(report.mean_fidelity >= 1.0 - 1e-10);
    CHECK(bbcjpw_rule().entries.at("PsiMinus")[0] == Pauli::None);
}

TEST_CASE("bbcjpw teleports random payloads in every branch") {
    SplitMix64 rng(42);
    for (int i = 0; i < 25; ++i) {
        auto report = bbcjpw_teleport(random_payload(rng, "in"), "in");
        for (const auto& b : report.branches) {
            CHECK(std::abs(b.probability - 0.25) <= 1e-10);
            CHECK(b.fidelity_post >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("derived bbcjpw corrections match the frozen rule") {
    CorrectionRule derived = derive_corrections(ProtocolKind::BbcjpwTeleport);
    CHECK(derived.entries.at("PsiMinus")[0] == Pauli::None);
    CHECK(derived.entries.at("PsiPlus")[0] == Pauli::Z);
    CHECK(derived.entries.at("PhiMinus")[0] == Pauli::X);
    CHECK(derived.entries.at("PhiPlus")[0] == Pauli::Y);
}

TEST_CASE("bbcjpw transports correlations with a reference qubit") {
    SplitMix64 rng(77);
    for (int i = 0; i < 10; ++i) {
        StateVector joint = random_state(CompositeSpace({2, 2}, {"ref", "in"}), rng);
        auto report = bbcjpw_teleport(joint, "in");
        for (const auto& b : report.branches) CHECK(b.fidelity_post >= 1.0 - 1e-10);
    }
}

TEST_CASE("bbcjpw reports are identical for the two bell strategies") {
    SplitMix64 rng(88);
    for (int i = 0; i < 10; ++i) {
        StateVector payload = random_payload(rng, "in");
        auto ri = bbcjpw_teleport(payload, "in", BellStrategy::Interaction);
        auto ra = bbcjpw_teleport(payload, "in", BellStrategy::Ancilla);
        REQUIRE(ri.branches.size() == ra.branches.size());
        for (size_t b = 0; b < ri.branches.size(); ++b) {
            CHECK(ri.branches[b].outcome == ra.branches[b].outcome);
            CHECK(std::abs(ri.branches[b].probability - ra.branches[b].probability) <= 1e-10);
            CHECK(std::abs(ri.branches[b].fidelity_post - ra.branches[b].fidelity_post) <= 1e-10);
        }
    }
}

TEST_CASE("bbcjpw sample and branch modes pick one branch") {
    StateVector payload = make_qubit("in", 0.6, 0.8);
    auto rs = bbcjpw_teleport(payload, "in", BellStrategy::Interaction, MeasureMode::sample(7));
    CHECK(rs.branches.size() == 1);
    CHECK(rs.mode == "sample");
    auto rb = bbcjpw_teleport(payload, "in", BellStrategy::Interaction, MeasureMode::branch(2));
    CHECK(rb.branches.size() == 1);
    CHECK(rb.mode == "branch");
}

TEST_CASE("derived crossed-swap corrections match the frozen table") {
    CorrectionRule derived = derive_corrections(ProtocolKind::CrossedSwap);
    REQUIRE(derived.entries.size() == 4);
    for (const auto& [key, ps] : derived.entries) {
        REQUIRE(ps.size() == 2);
        CHECK(ps[0] == ps[1]); // same rotation on both qubits
        CHECK(ps[0] == crossed_rule().entries.at(key)[0]);
    }
    CHECK(crossed_rule().entries.at("Z0X0")[0] == Pauli::Y);
    CHECK(crossed_rule().entries.at("Z0X2")[0] == Pauli::X);
    CHECK(crossed_rule().entries.at("Z2X0")[0] == Pauli::Z);
    CHECK(crossed_rule().entries.at("Z2X2")[0] == Pauli::None);
}

TEST_CASE("crossed-swap mixed table rows are pinned by basis inputs") {
    // An up-up payload pair collapses to up-up on the Z=2 branches and to
    // down-down on the Z=0 branches; only z/none and x/y rotations
    // respectively return the swap. This pins which mixed outcome takes x
    // and which takes z.
    StateVector in = tensor(make_qubit("q1", 1, 0), make_qubit("q2", 1, 0));
    auto report = crossed_swap_qubits(in, "q1", "q2");
    for (const auto& b : report.branches) CHECK(b.fidelity_post >= 1.0 - 1e-10);
}

TEST_CASE("crossed swap exchanges random payload pairs in every branch") {
    SplitMix64 rng(303);
    for (int i = 0; i < 10; ++i) {
        StateVector in = tensor(random_payload(rng, "q1"), random_payload(rng, "q2"));
        auto report = crossed_swap_qubits(in, "q1", "q2");
        REQUIRE(report.branches.size() == 4);
        for (const auto& b : report.branches) {
            CHECK(std::abs(b.probability - 0.25) <= 1e-10);
            CHECK(b.fidelity_post >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("crossed swap Z2X2 branch needs no rotation") {
    SplitMix64 rng(304);
    StateVector in = tensor(random_payload(rng, "q1"), random_payload(rng, "q2"));
    auto report = crossed_swap_qubits(in, "q1", "q2");
    for (const auto& b : report.branches)
        if (b.outcome == "Z2X2") CHECK(b.fidelity_pre >= 1.0 - 1e-10);
}

TEST_CASE("crossed swap handles entangled payloads and references") {
    SplitMix64 rng(305);
    // payloads entangled with each other
    StateVector joint = random_state(CompositeSpace({2, 2}, {"q1", "q2"}), rng);
    for (const auto& b : crossed_swap_qubits(joint, "q1", "q2").branches)
        CHECK(b.fidelity_post >= 1.0 - 1e-10);
    // payloads entangled with references
    StateVector withref = tensor(random_state(CompositeSpace({2, 2}, {"r1", "q1"}), rng),
                                 random_state(CompositeSpace({2, 2}, {"q2", "r2"}), rng));
    for (const auto& b : crossed_swap_qubits(withref, "q1", "q2").branches)
        CHECK(b.fidelity_post >= 1.0 - 1e-10);
}

TEST_CASE("cavity teleport succeeds in every branch with ideal gates") {
    SplitMix64 rng(401);
    for (int i = 0; i < 8; ++i) {
        auto report = cavity_teleport(random_payload(rng, "in"), "in");
        REQUIRE(report.branches.size() == 4);
        for (const auto& b : report.branches) {
            CHECK(std::abs(b.probability - 0.25) <= 1e-10);
            CHECK(b.fidelity_post >= 1.0 - 1e-10);
        }
    }
}

TEST_CASE("cavity teleport of the ground state returns the ground state") {
    auto report = cavity_teleport(make_qubit("in", 1, 0), "in");
    for (const auto& b : report.branches) CHECK(b.fidelity_post >= 1.0 - 1e-10);
}

TEST_CASE("cavity teleport with over-rotated gates degrades gracefully") {
    SplitMix64 rng(402);
    double worst = 1.0, mean_acc = 0.0;
    int n = 6;
    for (int i = 0; i < n; ++i) {
        auto report = cavity_teleport(random_payload(rng, "in"), "in", 0.05);
        mean_acc += report.mean_fidelity;
        worst = std::min(worst, report.mean_fidelity);
    }
    double mean = mean_acc / n;
    CHECK(mean < 1.0);
    CHECK(mean > 0.9);
    CHECK(worst > 0.9);
}

TEST_CASE("cavity swap exchanges basis and random payloads") {
    // |g>,|e> -> |e>,|g>
    auto report = cavity_swap(tensor(make_qubit("a1", 1, 0), make_qubit("a2", 0, 1)), "a1", "a2");
    REQUIRE(report.branches.size() == 16);
    for (const auto& b : report.branches) {
        CHECK(std::abs(b.probability - 1.0 / 16) <= 1e-10);
        CHECK(b.fidelity_post >= 1.0 - 1e-10);
    }

    SplitMix64 rng(403);
    for (int i = 0; i < 3; ++i) {
        StateVector in = tensor(random_payload(rng, "a1"), random_payload(rng, "a2"));
        auto rep = cavity_swap(in, "a1", "a2");
        for (const auto& b : rep.branches) CHECK(b.fidelity_post >= 1.0 - 1e-10);
        CHECK(rep.mean_fidelity >= 1.0 - 1e-10);
    }
}

TEST_CASE("direct cavity readout is equivalent to auxiliary-atom readout") {
    SplitMix64 rng(404);
    StateVector in = tensor(random_payload(rng, "a1"), random_payload(rng, "a2"));
    auto aux = cavity_swap(in, "a1", "a2", MeasureMode::enumerate(), false);
    auto direct = cavity_swap(in, "a1", "a2", MeasureMode::enumerate(), true);
    REQUIRE(aux.branches.size() == direct.branches.size());
    std::map<std::string, std::pair<double, double>> a, d;
    for (const auto& b : aux.branches) a[b.outcome] = {b.probability, b.fidelity_post};
    for (const auto& b : direct.branches) d[b.outcome] = {b.probability, b.fidelity_post};
    for (const auto& [key, val] : a) {
        REQUIRE(d.count(key) == 1);
        CHECK(std::abs(val.first - d[key].first) <= 1e-10);
        CHECK(std::abs(val.second - d[key].second) <= 1e-10);
    }
}

TEST_CASE("schedule validation rejects corrections before measurements") {
    ProtocolSchedule s;
    s.add_gate("prep", 0.0);
    s.add_correction("fix", 1.0, {5}); // reads a step that does not exist yet
    CHECK_THROWS_AS(s.validate(), std::runtime_error);

    ProtocolSchedule s2;
    s2.add_correction("fix", 1.0, {});
    CHECK_THROWS_AS(s2.validate(), std::runtime_error);

    ProtocolSchedule s3; // correction scheduled before its measurement
    int m = s3.add_measure("m", 2.0);
    s3.add_correction("fix", 1.0, {m});
    CHECK_THROWS_AS(s3.validate(), std::runtime_error);

    ProtocolSchedule ok;
    int m2 = ok.add_measure("m", 1.0);
    ok.add_correction("fix", 2.0, {m2});
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("teleport report JSON carries the branch records") {
    auto report = bbcjpw_teleport(make_qubit("in", 0.6, 0.8), "in");
    std::string json = report.to_json();
    CHECK(json.find("\"protocol\":\"bbcjpw\"") != std::string::npos);
    CHECK(json.find("\"mean_fidelity\"") != std::string::npos);
    CHECK(json.find("PsiMinus") != std::string::npos);
}
