// Continuous-variable teleportation on a uniform 1D grid per mode: finitely
// squeezed EPR resources, impulsive probe couplings, binned quadrature
// measurements, the crossed two-way swap, one-way teleportation, shift
// corrections, and the analytic shifted-state oracle. Units hbar = 1;
// momenta use the unitary transform with kernel exp(-i p x).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtel/protocols.hpp"
#include "qtel/state.hpp"

namespace qtel::cv {

struct Grid1D {
    int n_points = 0; // power of two, >= 32
    double dx = 0.0;

    Grid1D() = default;
    Grid1D(int n_points_, double dx_);
    static Grid1D over_range(int n_points, double half_range);

    double x_min() const { return -0.5 * n_points * dx; }
    double x(int k) const { return (k - n_points / 2) * dx; }
    double dp() const;
    double p(int j) const { return (j - n_points / 2) * dp(); }

    bool operator==(const Grid1D& o) const {
        return n_points == o.n_points && dx == o.dx;
    }
};

// Complex amplitudes on grid^rank with measure-weighted normalization
// sum |amps|^2 dx^rank = 1.
class WaveFunction {
public:
    WaveFunction() = default;
    WaveFunction(Grid1D grid, std::vector<std::string> modes, std::vector<Complex> amps);
    static WaveFunction normalized(Grid1D grid, std::vector<std::string> modes,
                                   std::vector<Complex> amps);
    // exp(i p0 x) * exp(-(x-center)^2 / (4 sigma^2)), position spread sigma.
    static WaveFunction gaussian(Grid1D grid, const std::string& mode, double center,
                                 double sigma, double momentum = 0.0);

    const Grid1D& grid() const { return grid_; }
    const std::vector<std::string>& modes() const { return modes_; }
    const std::vector<Complex>& amps() const { return amps_; }
    int rank() const { return static_cast<int>(modes_.size()); }
    int axis(const std::string& mode) const;
    double norm() const; // measure-weighted

    std::string to_json() const;
    // single-mode export: lines "x,re,im"
    std::string to_csv() const;

private:
    Grid1D grid_;
    std::vector<std::string> modes_;
    std::vector<Complex> amps_;
};

// Default per-run memory budget for grid tensors (bytes).
inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{1} << 30;

WaveFunction tensor_cv(const WaveFunction& a, const WaveFunction& b,
                       std::size_t memory_budget = kDefaultMemoryBudget);

double overlap2(const WaveFunction& a, const WaveFunction& b); // |<a|b>|^2

// Mean of the position marginal of one mode.
double mode_mean_q(const WaveFunction& s, const std::string& mode);

// Two-mode squeezed resource
//   Psi_r(Q1,Q2) ~ exp(-e^{2r}(Q1+Q2)^2/4 - e^{-2r}(Q1-Q2)^2/4),
// Var(Q1+Q2) = e^{-2r}. Errors out when the grid cannot resolve the squeezed
// width (dx > 2 e^{-r}).
WaveFunction make_epr(const Grid1D& grid, double r, const std::string& mode1 = "epr_a",
                      const std::string& mode2 = "epr_b");

enum class Quadrature { Q, P };

// Impulsive von Neumann coupling: accumulates sign * (system quadrature)
// onto the probe's pointer. For Q the probe position shifts by exact index
// shearing; for P the system axis is conjugated by the discrete transform
// and the probe's momentum pointer picks up the shift through exact phases.
WaveFunction probe_couple(const WaveFunction& s, const std::string& system_mode,
                          const std::string& probe_mode, Quadrature variable, int sign);

struct QuadratureObservable {
    enum class Kind { SingleQ, SingleP, SumQ, DiffQ, SumP, DiffP } kind;
    std::string mode1;
    std::string mode2; // two-mode observables only

    static QuadratureObservable q(std::string m);
    static QuadratureObservable p(std::string m);
    static QuadratureObservable q_sum(std::string m1, std::string m2);
    static QuadratureObservable q_diff(std::string m1, std::string m2);
    static QuadratureObservable p_sum(std::string m1, std::string m2);
    static QuadratureObservable p_diff(std::string m1, std::string m2);

    std::string name() const;
};

struct CVOutcome {
    std::string observable;
    double value = 0.0;
    double probability = 0.0;
};

// Outcome distribution over bins of width dx (position) or dp (momentum);
// zero-probability bins omitted.
std::vector<CVOutcome> quadrature_distribution(const WaveFunction& s,
                                               const QuadratureObservable& obs);

// Binned projective measurement. sample(seed) draws one bin; branch(k) picks
// the k-th nonzero bin in ascending value order. Throws on an all-zero
// projection.
std::pair<CVOutcome, WaveFunction> measure_quadrature(const WaveFunction& s,
                                                      const QuadratureObservable& obs,
                                                      MeasureMode mode);

// Drops a fully collapsed axis at the given index.
WaveFunction slice_mode(const WaveFunction& s, const std::string& mode, int index);

// Output laws and correction directions. Oneway and Crossed2 carry the state
// translated by -a with a momentum kick -b; Crossed1 the opposite signs.
enum class ShiftDirection { Oneway, Crossed1, Crossed2 };

// Evaluates the shifted-state law on the grid:
//   Oneway/Crossed2: exp(-i b x) psi(x + a); Crossed1: exp(+i b x) psi(x - a).
WaveFunction analytic_oracle_output(const WaveFunction& psi, double a, double b,
                                    ShiftDirection direction);

// Exact inverse of the corresponding output law: index roll plus phase kick.
// a must sit on the position lattice and b on the momentum lattice.
WaveFunction shift_correct(const WaveFunction& s, const std::string& mode, double a, double b,
                           ShiftDirection direction);

struct CvRunOptions {
    MeasureMode mode = MeasureMode::enumerate();
    int trials = 200;              // sample mode
    double branch_cutoff = 1e-9;   // enumerate mode: joint-probability floor
    std::size_t memory_budget = kDefaultMemoryBudget;
};

// One-way teleportation: forms psi_in (x) EPR(r), measures q + Q1 -> a then
// p - P1 -> b, checks the branch output against the analytic oracle
// (fidelity_pre), applies shift_correct and reports fidelity against the
// input (fidelity_post).
proto::TeleportReport cv_teleport_oneway(const WaveFunction& psi_in, double r,
                                         CvRunOptions options = {});

// Crossed two-way swap: two pointer probes (position pointer of width 2 dx
// for q1 - q2, momentum pointer of width 2 dp for p1 - p2) coupled at t1
// then t2, read out, and both outputs compared to the oracle pair and
// corrected. direction_means carries the two per-direction mean fidelities.
proto::TeleportReport cv_crossed_swap(const WaveFunction& psi1, const WaveFunction& psi2,
                                      CvRunOptions options = {});

// Probe-A mean after the two position couplings, before readout (pointer
// identity check).
double crossed_probe_pointer_mean(const WaveFunction& psi1, const WaveFunction& psi2,
                                  std::size_t memory_budget = kDefaultMemoryBudget);

} // namespace qtel::cv
