// Bell discrimination through linear single-particle evolutions and local
// detectors, for distinguishable particles, bosons, and fermions. Includes a
// seeded optimizer that searches for the best achievable discrimination
// success and certifies the gap to perfect discrimination.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtel/bell.hpp"
#include "qtel/state.hpp"

namespace qtel::nogo {

using bell::BellOutcome;

enum class Statistics { Distinguishable, Boson, Fermion };

const char* to_string(Statistics st);
Statistics statistics_from_string(const std::string& name);

// Detection pattern as 1-based output mode indices. Ordered (left particle,
// right particle) for distinguishable particles; unordered with
// first <= second for identical particles (first == second for bosons only).
struct Pattern {
    int first = 0;
    int second = 0;
    bool operator<(const Pattern& o) const {
        return first < o.first || (first == o.first && second < o.second);
    }
    bool operator==(const Pattern& o) const { return first == o.first && second == o.second; }
};

std::string to_string(const Pattern& p);

// Rows a,b,c,d of the single-particle evolution: the images of the four input
// states (up/down in the left and right channels) over n_modes output modes.
// The rows must be orthonormal; for distinguishable particles the supports of
// {a,b} and {c,d} must additionally be disjoint.
struct LinearEvolution {
    int n_modes = 0;
    std::vector<Complex> a, b, c, d;

    const std::vector<Complex>& row(int k) const;
    void validate(Statistics st) const;

    std::string to_json() const;
    static LinearEvolution from_json(const std::string& text);

    // The 4-mode beam-splitter scheme that distinguishes the two Psi states:
    //   up_L -> (|1>+|3>)/sqrt2, down_L -> (|2>+|4>)/sqrt2,
    //   up_R -> (|1>-|3>)/sqrt2, down_R -> (|2>-|4>)/sqrt2.
    static LinearEvolution beam_splitter_scheme();
    // Rows equal to the first four basis vectors (distinguishable particles).
    static LinearEvolution identity_scheme(int n_modes = 4);
};

using OutcomeAmplitudes = std::map<Pattern, Complex>;

// Expands the evolved two-particle state over detection patterns.
// Distinguishable particles use the plain product; bosons symmetrize and
// fermions antisymmetrize, with a 1/sqrt2 normalization on off-diagonal
// identical-particle patterns.
OutcomeAmplitudes evolve_bell(const LinearEvolution& ev, Statistics st, BellOutcome kind);

std::map<Pattern, double> detection_distribution(const LinearEvolution& ev, Statistics st,
                                                 BellOutcome kind);

// Coefficient of |i>_1 |j>_2 in the ordered (first-quantized) expansion,
// before projecting onto symmetrized detection states. 1-based modes.
Complex ordered_pair_coefficient(const LinearEvolution& ev, Statistics st, BellOutcome kind,
                                 int i, int j);

struct DiscriminationReport {
    // Mean probability, over the four equiprobable Bell inputs, that the
    // detection pattern identifies the input uniquely.
    double success = 0.0;
    std::array<double, 4> per_state{}; // indexed by BellOutcome order
    std::map<Pattern, std::vector<BellOutcome>> partition;
};

DiscriminationReport discrimination_success(const LinearEvolution& ev, Statistics st,
                                            double tol = 1e-9);

struct OptimizeOptions {
    int stages = 9;         // annealing stages; T halves per stage
    int steps = 30;         // ascent iterations per stage
    double t_start = 0.3;   // initial smoothing temperature
    double t_final = 1.2e-3;// final (coldest) smoothing temperature
    double fd_step = 1e-5;  // finite-difference step
    int polish_top = 8;     // restarts refined to machine precision
    int polish_iters = 80;
};

struct OptimizeResult {
    LinearEvolution best;
    DiscriminationReport report;
    std::vector<double> trace; // best hard success after each restart
};

// Maximizes discrimination success over linear evolutions: random restarts,
// smoothed-objective gradient ascent, then a least-squares polish that drives
// the competing amplitudes of dominated patterns to zero. Deterministic for a
// given seed; restart r uses sub-seed seed + r.
OptimizeResult optimize_discrimination(Statistics st, int n_modes, int restarts,
                                       std::uint64_t seed, OptimizeOptions opt = {});

struct Certificate {
    Statistics statistics;
    int n_modes = 0;
    int restarts = 0;
    std::uint64_t seed = 0;
    double max_success = 0.0;
    double gap_to_one = 0.0;

    std::string to_json() const;
};

Certificate certify_no_perfect(Statistics st, int n_modes, int restarts, std::uint64_t seed,
                               OptimizeOptions opt = {});

// Random evolution satisfying the invariants for the given statistics
// (orthonormal rows; for distinguishable particles the left rows live on the
// first half of the modes and the right rows on the second half).
LinearEvolution random_evolution(Statistics st, int n_modes, SplitMix64& rng);

} // namespace qtel::nogo
