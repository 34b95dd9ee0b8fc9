#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "qtel/bell.hpp"
#include "qtel/state.hpp"

using namespace qtel;

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

StateVector ket0(const std::string& l) { return make_qubit(l, 1, 0); }
StateVector ket1(const std::string& l) { return make_qubit(l, 0, 1); }
StateVector ket_plus(const std::string& l) { return make_qubit(l, kInvSqrt2, kInvSqrt2); }
} // namespace

TEST_CASE("tensor builds product basis states") {
    StateVector s = tensor(ket0("a"), ket1("b"));
    CHECK(s.amps()[0] == Complex{});
    CHECK(s.amps()[1] == Complex{1.0, 0.0});
    CHECK(s.amps()[2] == Complex{});
    CHECK(s.amps()[3] == Complex{});
}

TEST_CASE("tensor is linear in each factor") {
    StateVector s = tensor(ket_plus("a"), ket0("b"));
    CHECK(s.amps()[0].real() == doctest::Approx(kInvSqrt2));
    CHECK(s.amps()[1] == Complex{});
    CHECK(s.amps()[2].real() == doctest::Approx(kInvSqrt2));
    CHECK(s.amps()[3] == Complex{});
}

TEST_CASE("tensor preserves normalization for random states") {
    SplitMix64 rng(11);
    for (int i = 0; i < 20; ++i) {
        StateVector s1 = random_state(CompositeSpace({2, 3}, {"a", "b"}), rng);
        StateVector s2 = random_state(CompositeSpace({2}, {"c"}), rng);
        CHECK(tensor(s1, s2).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("tensor rejects duplicate labels") {
    CHECK_THROWS_AS(tensor(ket0("a"), ket1("a")), std::invalid_argument);
}

TEST_CASE("apply identity leaves state untouched") {
    SplitMix64 rng(3);
    StateVector s = random_state(CompositeSpace({2, 2}, {"a", "b"}), rng);
    StateVector t = apply(Operator({"b"}, Matrix::identity(2)), s);
    CHECK(fidelity(s, t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("conditional spin flip acts as printed") {
    StateVector upup = tensor(ket0("a"), ket0("b"));
    StateVector t = apply(bell::conditional_spin_flip("a", "b"), upup);
    CHECK(fidelity(t, tensor(ket0("a"), ket1("b"))) == doctest::Approx(1.0));
}

TEST_CASE("U then U-dagger returns the original state") {
    SplitMix64 rng(17);
    for (int i = 0; i < 10; ++i) {
        StateVector s = random_state(CompositeSpace({2, 2, 2}, {"a", "b", "c"}), rng);
        Operator u = bell::conditional_spin_flip("a", "c");
        Operator udag({"a", "c"}, u.matrix.adjoint());
        StateVector t = apply(udag, apply(u, s));
        CHECK(fidelity(s, t) >= 1.0 - 1e-12);
    }
}

TEST_CASE("apply rejects unknown labels and non-unitary matrices") {
    StateVector s = ket0("a");
    CHECK_THROWS_AS(apply(Operator({"zz"}, Matrix::identity(2)), s), std::invalid_argument);
    Matrix bad(2);
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(Operator({"a"}, bad), std::invalid_argument);
    CHECK_THROWS_AS(apply(Operator({"a"}, Matrix::identity(4), false), s), std::invalid_argument);
}

TEST_CASE("apply preserves norm") {
    SplitMix64 rng(23);
    for (int i = 0; i < 25; ++i) {
        StateVector s = random_state(CompositeSpace({2, 2, 2}, {"a", "b", "c"}), rng);
        StateVector t = apply(bell::hadamard("b"), s);
        CHECK(std::abs(t.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("measuring |0> in the computational basis is deterministic") {
    auto branches = measure(ket0("a"), bell::z_basis("a"));
    REQUIRE(branches.size() == 1);
    CHECK(branches[0].outcome == 0);
    CHECK(branches[0].probability == doctest::Approx(1.0));
}

TEST_CASE("measuring |+> in z gives two equal branches") {
    auto branches = measure(ket_plus("a"), bell::z_basis("a"));
    REQUIRE(branches.size() == 2);
    CHECK(branches[0].probability == doctest::Approx(0.5));
    CHECK(branches[1].probability == doctest::Approx(0.5));
}

TEST_CASE("measuring the first qubit of PsiMinus in z") {
    StateVector psi = bell::bell_state(bell::BellOutcome::PsiMinus, "a", "b");
    auto branches = measure(psi, bell::z_basis("a"));
    REQUIRE(branches.size() == 2);
    CHECK(branches[0].probability == doctest::Approx(0.5));
    CHECK(branches[1].probability == doctest::Approx(0.5));
    // post states |up,down> and -|down,up>
    CHECK(branches[0].post.amps()[1].real() == doctest::Approx(1.0));
    CHECK(branches[1].post.amps()[2].real() == doctest::Approx(-1.0));
}

TEST_CASE("branch probabilities sum to one for random states and bases") {
    SplitMix64 rng(5);
    for (int i = 0; i < 20; ++i) {
        StateVector s = random_state(CompositeSpace({2, 2, 2}, {"a", "b", "c"}), rng);
        double total = 0.0;
        for (const auto& b : measure(s, bell::x_basis("b"))) total += b.probability;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("measurement is projective: repeating reproduces the outcome") {
    SplitMix64 rng(7);
    for (int i = 0; i < 10; ++i) {
        StateVector s = random_state(CompositeSpace({2, 2}, {"a", "b"}), rng);
        for (const auto& b : measure(s, bell::x_basis("a"))) {
            auto again = measure(b.post, bell::x_basis("a"));
            REQUIRE(again.size() == 1);
            CHECK(again[0].outcome == b.outcome);
            CHECK(again[0].probability == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("sampled outcome frequencies match enumerated probabilities") {
    SplitMix64 rng(29);
    StateVector s = random_state(CompositeSpace({2, 2}, {"a", "b"}), rng);
    MeasurementBasis basis = MeasurementBasis::computational({"a", "b"}, {2, 2});
    auto branches = measure(s, basis);

    const int trials = 10000;
    std::map<int, int> counts;
    for (int t = 0; t < trials; ++t) {
        auto one = measure(s, basis, MeasureMode::sample(1000 + t));
        REQUIRE(one.size() == 1);
        counts[one[0].outcome]++;
    }
    for (const auto& b : branches) {
        double expected = b.probability * trials;
        double sigma = std::sqrt(trials * b.probability * (1.0 - b.probability));
        CHECK(std::abs(counts[b.outcome] - expected) <= 5.0 * sigma + 1.0);
    }
}

TEST_CASE("branch(k) mode selects deterministically") {
    StateVector s = ket_plus("a");
    auto b0 = measure(s, bell::z_basis("a"), MeasureMode::branch(0));
    auto b1 = measure(s, bell::z_basis("a"), MeasureMode::branch(1));
    REQUIRE(b0.size() == 1);
    REQUIRE(b1.size() == 1);
    CHECK(b0[0].outcome == 0);
    CHECK(b1[0].outcome == 1);
    CHECK_THROWS_AS(measure(s, bell::z_basis("a"), MeasureMode::branch(2)),
                    std::invalid_argument);
}

TEST_CASE("measure rejects a non-orthonormal basis") {
    MeasurementBasis bad;
    bad.targets = {"a"};
    bad.columns = Matrix(2);
    bad.columns(0, 0) = 1.0;
    bad.columns(0, 1) = 1.0;
    CHECK_THROWS_AS(measure(ket0("a"), bad), std::invalid_argument);
}

TEST_CASE("fidelity basics") {
    SplitMix64 rng(31);
    StateVector s = random_state(CompositeSpace({2, 2}, {"a", "b"}), rng);
    CHECK(fidelity(s, s) == doctest::Approx(1.0));
    // global phase invariance
    std::vector<Complex> amps = s.amps();
    Complex phase = std::polar(1.0, 0.8342);
    for (auto& a : amps) a *= phase;
    CHECK(fidelity(s, StateVector(s.space(), amps)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(ket0("a"), ket1("a")) == doctest::Approx(0.0));
    CHECK_THROWS_AS(fidelity(ket0("a"), ket0("b")), std::invalid_argument);
}

TEST_CASE("permute reorders subsystems consistently") {
    StateVector s = tensor(ket0("a"), tensor(ket1("b"), ket_plus("c")));
    StateVector p = permute(s, {"c", "a", "b"});
    CHECK(p.space().labels() == std::vector<std::string>{"c", "a", "b"});
    StateVector back = permute(p, {"a", "b", "c"});
    CHECK(fidelity(s, back) == doctest::Approx(1.0));
}

TEST_CASE("split_off separates product factors and rejects entangled ones") {
    SplitMix64 rng(37);
    StateVector part = random_state(CompositeSpace({2}, {"x"}), rng);
    StateVector rest = random_state(CompositeSpace({2, 2}, {"y", "z"}), rng);
    auto [sub, remainder] = split_off(tensor(part, rest), {"x"});
    CHECK(fidelity(sub, part) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(remainder, rest) == doctest::Approx(1.0).epsilon(1e-12));

    StateVector entangled = bell::bell_state(bell::BellOutcome::PhiPlus, "x", "y");
    CHECK_THROWS_AS(split_off(entangled, {"x"}), std::runtime_error);
}

TEST_CASE("state JSON round trip") {
    SplitMix64 rng(41);
    StateVector s = random_state(CompositeSpace({2, 3}, {"a", "b"}), rng);
    StateVector t = StateVector::from_json(s.to_json());
    CHECK(t.space() == s.space());
    CHECK(fidelity(s, t) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("states reject non-finite and unnormalized amplitudes") {
    CompositeSpace space({2}, {"a"});
    CHECK_THROWS_AS(StateVector(space, {Complex(0.5, 0), Complex(0.5, 0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(StateVector(space, {Complex(std::nan(""), 0), Complex(0, 0)}),
                    std::invalid_argument);
}
