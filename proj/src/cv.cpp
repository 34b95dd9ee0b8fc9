#include "qtel/cv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include <fftw3.h>

#include "json.hpp"

namespace qtel::cv {

namespace {

const double kPi = 3.14159265358979323846;
const double kBinEps = 1e-14;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    while (exp-- > 0) r *= base;
    return r;
}

void check_budget(int n, int rank, std::size_t budget) {
    std::size_t bytes = static_cast<std::size_t>(ipow(n, rank)) * sizeof(Complex);
    if (bytes > budget)
        throw std::runtime_error("memory budget exceeded: " + std::to_string(rank) +
                                 " modes at " + std::to_string(n) + " points need " +
                                 std::to_string(bytes) + " bytes (budget " +
                                 std::to_string(budget) + ")");
}

std::int64_t stride_of(int n, int rank, int axis) { return ipow(n, rank - 1 - axis); }

// Unitary centered transform along one axis: kernel exp(-i p x) with
// p_j = (j - n/2) dp, x_k = (k - n/2) dx. For n divisible by four this is the
// plain FFT with checkerboard phases on both sides.
void transform_axis(std::vector<Complex>& amps, int n, int rank, int axis, bool forward) {
    fftw_complex* in = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, in, out, forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
    const std::int64_t stride = stride_of(n, rank, axis);
    const std::int64_t lines = static_cast<std::int64_t>(amps.size()) / n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    for (std::int64_t line = 0; line < lines; ++line) {
        std::int64_t inner = line % stride;
        std::int64_t outer = line / stride;
        std::int64_t base = outer * stride * n + inner;
        for (int k = 0; k < n; ++k) {
            Complex v = amps[base + k * stride];
            if (k & 1) v = -v;
            in[k][0] = v.real();
            in[k][1] = v.imag();
        }
        fftw_execute(plan);
        for (int j = 0; j < n; ++j) {
            Complex v(out[j][0], out[j][1]);
            if (j & 1) v = -v;
            amps[base + j * stride] = v * scale;
        }
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
}

char value_buf[64];
std::string fmt(double v) {
    std::snprintf(value_buf, sizeof(value_buf), "%.10g", v);
    return value_buf;
}

} // namespace

Grid1D::Grid1D(int n_points_, double dx_) : n_points(n_points_), dx(dx_) {
    require(n_points >= 32, "grid needs at least 32 points");
    require((n_points & (n_points - 1)) == 0, "grid size must be a power of two");
    require(dx > 0.0 && std::isfinite(dx), "grid spacing must be positive");
}

Grid1D Grid1D::over_range(int n_points, double half_range) {
    require(half_range > 0.0, "grid range must be positive");
    return Grid1D(n_points, 2.0 * half_range / n_points);
}

double Grid1D::dp() const { return 2.0 * kPi / (n_points * dx); }

WaveFunction::WaveFunction(Grid1D grid, std::vector<std::string> modes,
                           std::vector<Complex> amps)
    : grid_(grid), modes_(std::move(modes)), amps_(std::move(amps)) {
    require(!modes_.empty(), "wave function needs at least one mode");
    for (size_t i = 0; i < modes_.size(); ++i)
        for (size_t j = i + 1; j < modes_.size(); ++j)
            require(modes_[i] != modes_[j], "duplicate mode label: " + modes_[i]);
    require(static_cast<std::int64_t>(amps_.size()) == ipow(grid_.n_points, rank()),
            "amplitude tensor does not match grid^rank");
    for (const Complex& a : amps_)
        require(std::isfinite(a.real()) && std::isfinite(a.imag()), "non-finite amplitude");
    require(std::abs(norm() - 1.0) <= 1e-8, "wave function is not normalized");
}

WaveFunction WaveFunction::normalized(Grid1D grid, std::vector<std::string> modes,
                                      std::vector<Complex> amps) {
    double measure = std::pow(grid.dx, static_cast<double>(modes.size()));
    double n2 = 0.0;
    for (const Complex& a : amps) n2 += std::norm(a);
    n2 *= measure;
    require(n2 > 1e-300, "cannot normalize a zero wave function");
    double inv = 1.0 / std::sqrt(n2);
    for (Complex& a : amps) a *= inv;
    return WaveFunction(grid, std::move(modes), std::move(amps));
}

WaveFunction WaveFunction::gaussian(Grid1D grid, const std::string& mode, double center,
                                    double sigma, double momentum) {
    require(sigma > 0.0, "gaussian width must be positive");
    std::vector<Complex> amps(grid.n_points);
    for (int k = 0; k < grid.n_points; ++k) {
        double x = grid.x(k);
        double envelope = std::exp(-(x - center) * (x - center) / (4.0 * sigma * sigma));
        amps[k] = std::polar(envelope, momentum * x);
    }
    return normalized(grid, {mode}, std::move(amps));
}

int WaveFunction::axis(const std::string& mode) const {
    for (int i = 0; i < rank(); ++i)
        if (modes_[i] == mode) return i;
    throw std::invalid_argument("unknown mode: " + mode);
}

double WaveFunction::norm() const {
    double n2 = 0.0;
    for (const Complex& a : amps_) n2 += std::norm(a);
    return std::sqrt(n2 * std::pow(grid_.dx, static_cast<double>(rank())));
}

WaveFunction tensor_cv(const WaveFunction& a, const WaveFunction& b,
                       std::size_t memory_budget) {
    require(a.grid() == b.grid(), "modes must share one grid");
    for (const auto& m : b.modes())
        for (const auto& ma : a.modes()) require(m != ma, "duplicate mode label: " + m);
    check_budget(a.grid().n_points, a.rank() + b.rank(), memory_budget);

    std::vector<std::string> modes = a.modes();
    modes.insert(modes.end(), b.modes().begin(), b.modes().end());
    std::vector<Complex> amps;
    amps.reserve(a.amps().size() * b.amps().size());
    for (const Complex& x : a.amps())
        for (const Complex& y : b.amps()) amps.push_back(x * y);
    return WaveFunction(a.grid(), std::move(modes), std::move(amps));
}

double overlap2(const WaveFunction& a, const WaveFunction& b) {
    require(a.grid() == b.grid() && a.rank() == b.rank(),
            "overlap requires matching grids and ranks");
    Complex acc{};
    for (size_t i = 0; i < a.amps().size(); ++i) acc += std::conj(a.amps()[i]) * b.amps()[i];
    return std::norm(acc * std::pow(a.grid().dx, static_cast<double>(a.rank())));
}

double mode_mean_q(const WaveFunction& s, const std::string& mode) {
    int ax = s.axis(mode);
    int n = s.grid().n_points;
    std::int64_t stride = stride_of(n, s.rank(), ax);
    double mean = 0.0, total = 0.0;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(s.amps().size()); ++i) {
        int k = static_cast<int>((i / stride) % n);
        double w = std::norm(s.amps()[i]);
        mean += w * s.grid().x(k);
        total += w;
    }
    return mean / total;
}

WaveFunction make_epr(const Grid1D& grid, double r, const std::string& mode1,
                      const std::string& mode2) {
    require(r >= 0.0 && std::isfinite(r), "squeezing parameter must be non-negative");
    if (grid.dx > 2.0 * std::exp(-r))
        throw std::runtime_error("grid too coarse to resolve the squeezed width: dx = " +
                                 std::to_string(grid.dx) + " > 2 exp(-r) = " +
                                 std::to_string(2.0 * std::exp(-r)));
    const int n = grid.n_points;
    const double wp = std::exp(2.0 * r) / 4.0;  // (Q1+Q2)^2 weight
    const double wm = std::exp(-2.0 * r) / 4.0; // (Q1-Q2)^2 weight
    std::vector<Complex> amps(static_cast<size_t>(n) * n);
    for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2) {
            double s = grid.x(k1) + grid.x(k2);
            double d = grid.x(k1) - grid.x(k2);
            amps[static_cast<size_t>(k1) * n + k2] = std::exp(-wp * s * s - wm * d * d);
        }
    return WaveFunction::normalized(grid, {mode1, mode2}, std::move(amps));
}

WaveFunction probe_couple(const WaveFunction& s, const std::string& system_mode,
                          const std::string& probe_mode, Quadrature variable, int sign) {
    require(sign == 1 || sign == -1, "coupling sign must be +1 or -1");
    const int n = s.grid().n_points;
    int sys = s.axis(system_mode);
    int probe = s.axis(probe_mode);
    require(sys != probe, "system and probe must differ");
    std::int64_t sys_stride = stride_of(n, s.rank(), sys);
    std::int64_t probe_stride = stride_of(n, s.rank(), probe);

    std::vector<Complex> amps = s.amps();
    if (variable == Quadrature::Q) {
        // exact index shearing: the probe coordinate shifts by sign * x_sys
        std::vector<Complex> out(amps.size());
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(amps.size()); ++i) {
            int ks = static_cast<int>((i / sys_stride) % n);
            int kp = static_cast<int>((i / probe_stride) % n);
            int shift = sign * (ks - n / 2);
            int kp_src = ((kp - shift) % n + n) % n;
            out[i] = amps[i + (static_cast<std::int64_t>(kp_src) - kp) * probe_stride];
        }
        amps = std::move(out);
    } else {
        // conjugate the system axis, then shift the probe's momentum pointer
        // by sign * p_sys through exact phases on the probe coordinate
        transform_axis(amps, n, s.rank(), sys, true);
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(amps.size()); ++i) {
            int js = static_cast<int>((i / sys_stride) % n);
            int kp = static_cast<int>((i / probe_stride) % n);
            amps[i] *= std::polar(1.0, sign * s.grid().p(js) * s.grid().x(kp));
        }
        transform_axis(amps, n, s.rank(), sys, false);
    }
    return WaveFunction(s.grid(), s.modes(), std::move(amps));
}

QuadratureObservable QuadratureObservable::q(std::string m) {
    return {Kind::SingleQ, std::move(m), {}};
}
QuadratureObservable QuadratureObservable::p(std::string m) {
    return {Kind::SingleP, std::move(m), {}};
}
QuadratureObservable QuadratureObservable::q_sum(std::string m1, std::string m2) {
    return {Kind::SumQ, std::move(m1), std::move(m2)};
}
QuadratureObservable QuadratureObservable::q_diff(std::string m1, std::string m2) {
    return {Kind::DiffQ, std::move(m1), std::move(m2)};
}
QuadratureObservable QuadratureObservable::p_sum(std::string m1, std::string m2) {
    return {Kind::SumP, std::move(m1), std::move(m2)};
}
QuadratureObservable QuadratureObservable::p_diff(std::string m1, std::string m2) {
    return {Kind::DiffP, std::move(m1), std::move(m2)};
}

std::string QuadratureObservable::name() const {
    switch (kind) {
    case Kind::SingleQ: return "q(" + mode1 + ")";
    case Kind::SingleP: return "p(" + mode1 + ")";
    case Kind::SumQ: return "q(" + mode1 + ")+q(" + mode2 + ")";
    case Kind::DiffQ: return "q(" + mode1 + ")-q(" + mode2 + ")";
    case Kind::SumP: return "p(" + mode1 + ")+p(" + mode2 + ")";
    case Kind::DiffP: return "p(" + mode1 + ")-p(" + mode2 + ")";
    }
    return "?";
}

namespace {

// Maps an observable to (axes, momentum?, bin index function, bin value).
struct ObservablePlan {
    std::vector<int> axes;
    bool momentum = false;
    int n_bins = 0;
    // bin index from the 1-2 axis indices
    std::function<int(int, int)> bin_of;
    std::function<double(int)> value_of;
};

ObservablePlan plan_observable(const WaveFunction& s, const QuadratureObservable& obs) {
    using Kind = QuadratureObservable::Kind;
    const int n = s.grid().n_points;
    ObservablePlan plan;
    switch (obs.kind) {
    case Kind::SingleQ:
    case Kind::SingleP: {
        plan.axes = {s.axis(obs.mode1)};
        plan.momentum = obs.kind == Kind::SingleP;
        plan.n_bins = n;
        plan.bin_of = [](int k, int) { return k; };
        double step = plan.momentum ? s.grid().dp() : s.grid().dx;
        plan.value_of = [n, step](int b) { return (b - n / 2) * step; };
        break;
    }
    case Kind::SumQ:
    case Kind::DiffQ: {
        plan.axes = {s.axis(obs.mode1), s.axis(obs.mode2)};
        plan.momentum = false;
        bool diff = obs.kind == Kind::DiffQ;
        plan.n_bins = 2 * n - 1;
        if (diff) {
            plan.bin_of = [n](int k1, int k2) { return k1 - k2 + n - 1; };
            plan.value_of = [n, this_dx = s.grid().dx](int b) { return (b - n + 1) * this_dx; };
        } else {
            plan.bin_of = [](int k1, int k2) { return k1 + k2; };
            plan.value_of = [n, this_dx = s.grid().dx](int b) { return (b - n) * this_dx; };
        }
        break;
    }
    case Kind::SumP:
    case Kind::DiffP: {
        // lattice momenta are periodic: bin sums/differences modulo n with
        // the centered representative as the reported value
        plan.axes = {s.axis(obs.mode1), s.axis(obs.mode2)};
        plan.momentum = true;
        bool diff = obs.kind == Kind::DiffP;
        plan.n_bins = n;
        if (diff) {
            plan.bin_of = [n](int j1, int j2) { return ((j1 - j2) % n + n) % n; };
        } else {
            plan.bin_of = [n](int j1, int j2) { return (j1 + j2 - n + 2 * n) % n; };
        }
        plan.value_of = [n, dp = s.grid().dp()](int b) {
            int centered = (b + n / 2) % n - n / 2;
            return centered * dp;
        };
        break;
    }
    }
    return plan;
}

std::vector<double> bin_probabilities(const std::vector<Complex>& amps, int n, int rank,
                                      const ObservablePlan& plan, double measure) {
    std::vector<double> w(plan.n_bins, 0.0);
    std::int64_t stride1 = stride_of(n, rank, plan.axes[0]);
    std::int64_t stride2 = plan.axes.size() > 1 ? stride_of(n, rank, plan.axes[1]) : 0;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(amps.size()); ++i) {
        int k1 = static_cast<int>((i / stride1) % n);
        int k2 = plan.axes.size() > 1 ? static_cast<int>((i / stride2) % n) : 0;
        w[plan.bin_of(k1, k2)] += std::norm(amps[i]) * measure;
    }
    return w;
}

} // namespace

std::vector<CVOutcome> quadrature_distribution(const WaveFunction& s,
                                               const QuadratureObservable& obs) {
    ObservablePlan plan = plan_observable(s, obs);
    const int n = s.grid().n_points;
    std::vector<Complex> amps = s.amps();
    if (plan.momentum)
        for (int ax : plan.axes) transform_axis(amps, n, s.rank(), ax, true);
    double measure = std::pow(s.grid().dx, static_cast<double>(s.rank()));
    std::vector<double> w = bin_probabilities(amps, n, s.rank(), plan, measure);

    std::vector<CVOutcome> out;
    for (int b = 0; b < plan.n_bins; ++b)
        if (w[b] > kBinEps) out.push_back({obs.name(), plan.value_of(b), w[b]});
    return out;
}

std::pair<CVOutcome, WaveFunction> measure_quadrature(const WaveFunction& s,
                                                      const QuadratureObservable& obs,
                                                      MeasureMode mode) {
    ObservablePlan plan = plan_observable(s, obs);
    const int n = s.grid().n_points;
    std::vector<Complex> amps = s.amps();
    if (plan.momentum)
        for (int ax : plan.axes) transform_axis(amps, n, s.rank(), ax, true);
    double measure = std::pow(s.grid().dx, static_cast<double>(s.rank()));
    std::vector<double> w = bin_probabilities(amps, n, s.rank(), plan, measure);

    std::vector<int> live;
    for (int b = 0; b < plan.n_bins; ++b)
        if (w[b] > kBinEps) live.push_back(b);
    if (live.empty()) throw std::runtime_error("all-zero projection in quadrature measurement");

    int chosen;
    switch (mode.kind) {
    case MeasureMode::Kind::Sample: {
        SplitMix64 rng(mode.seed);
        double u = rng.uniform(), acc = 0.0, total = 0.0;
        for (int b : live) total += w[b];
        chosen = live.back();
        for (int b : live) {
            acc += w[b] / total;
            if (u < acc) {
                chosen = b;
                break;
            }
        }
        break;
    }
    case MeasureMode::Kind::Branch:
        require(mode.k >= 0 && mode.k < static_cast<int>(live.size()),
                "branch index out of range");
        chosen = live[static_cast<size_t>(mode.k)];
        break;
    default:
        throw std::invalid_argument("quadrature measurement needs sample or branch mode");
    }

    // project onto the chosen bin
    std::int64_t stride1 = stride_of(n, s.rank(), plan.axes[0]);
    std::int64_t stride2 = plan.axes.size() > 1 ? stride_of(n, s.rank(), plan.axes[1]) : 0;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(amps.size()); ++i) {
        int k1 = static_cast<int>((i / stride1) % n);
        int k2 = plan.axes.size() > 1 ? static_cast<int>((i / stride2) % n) : 0;
        if (plan.bin_of(k1, k2) != chosen) amps[i] = Complex{};
    }
    if (plan.momentum)
        for (int ax : plan.axes) transform_axis(amps, n, s.rank(), ax, false);

    CVOutcome outcome{obs.name(), plan.value_of(chosen), w[chosen]};
    return {outcome, WaveFunction::normalized(s.grid(), s.modes(), std::move(amps))};
}

WaveFunction slice_mode(const WaveFunction& s, const std::string& mode, int index) {
    const int n = s.grid().n_points;
    require(index >= 0 && index < n, "slice index out of range");
    require(s.rank() >= 2, "cannot slice the last mode");
    int ax = s.axis(mode);
    std::int64_t stride = stride_of(n, s.rank(), ax);

    std::vector<std::string> modes;
    for (int i = 0; i < s.rank(); ++i)
        if (i != ax) modes.push_back(s.modes()[i]);
    std::vector<Complex> out;
    out.reserve(s.amps().size() / n);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(s.amps().size()); ++i)
        if (static_cast<int>((i / stride) % n) == index) out.push_back(s.amps()[i]);
    return WaveFunction::normalized(s.grid(), std::move(modes), std::move(out));
}

namespace {
int lattice_steps(double value, double step, const char* what) {
    double ratio = value / step;
    double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9)
        throw std::invalid_argument(std::string("off-grid shift request: ") + what);
    return static_cast<int>(rounded);
}
} // namespace

WaveFunction analytic_oracle_output(const WaveFunction& psi, double a, double b,
                                    ShiftDirection direction) {
    require(psi.rank() == 1, "oracle takes a single-mode wave function");
    const int n = psi.grid().n_points;
    int sa = lattice_steps(a, psi.grid().dx, "a");
    double phase_sign = (direction == ShiftDirection::Crossed1) ? +1.0 : -1.0;
    int arg_shift = (direction == ShiftDirection::Crossed1) ? -sa : +sa;

    std::vector<Complex> amps(n);
    for (int k = 0; k < n; ++k) {
        int src = ((k + arg_shift) % n + n) % n;
        amps[k] = psi.amps()[src] * std::polar(1.0, phase_sign * b * psi.grid().x(k));
    }
    return WaveFunction::normalized(psi.grid(), psi.modes(), std::move(amps));
}

WaveFunction shift_correct(const WaveFunction& s, const std::string& mode, double a, double b,
                           ShiftDirection direction) {
    const int n = s.grid().n_points;
    int ax = s.axis(mode);
    int sa = lattice_steps(a, s.grid().dx, "a");
    lattice_steps(b, s.grid().dp(), "b");
    // inverse of the corresponding output law
    int roll = (direction == ShiftDirection::Crossed1) ? -sa : +sa;
    double kick = (direction == ShiftDirection::Crossed1) ? -b : +b;

    std::int64_t stride = stride_of(n, s.rank(), ax);
    std::vector<Complex> amps(s.amps().size());
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(amps.size()); ++i) {
        int k = static_cast<int>((i / stride) % n);
        int src = ((k - roll) % n + n) % n;
        amps[i] = s.amps()[i + (static_cast<std::int64_t>(src) - k) * stride] *
                  std::polar(1.0, kick * s.grid().x(k));
    }
    return WaveFunction(s.grid(), s.modes(), std::move(amps));
}

// ---- one-way teleportation ---------------------------------------------------

namespace {

struct OnewayBranch {
    double a, b, prob, fid_pre, fid_post;
};

// The product structure psi (x) EPR survives until the first measurement, so
// branches are computed from the conditional stripe
//   S_a(q, Q2) = psi(q) EPR(a - q, Q2)
// without materializing the three-mode tensor; the second outcome b is the
// momentum of the stripe coordinate (the q + Q1 = a constraint makes p - P1
// act as -i d/dq along the stripe). The equivalence with the direct
// three-mode route is covered by tests.
struct OnewayEngine {
    const WaveFunction& psi;
    WaveFunction epr;
    int n;
    std::vector<double> p_a; // probability per sum bin m (a = (m-n) dx)

    OnewayEngine(const WaveFunction& psi_in, double r)
        : psi(psi_in), epr(make_epr(psi_in.grid(), r)), n(psi_in.grid().n_points) {
        require(psi.rank() == 1, "payload must be a single mode");
        const double dx = psi.grid().dx;
        std::vector<double> w1(n), w2(n, 0.0);
        for (int k = 0; k < n; ++k) w1[k] = std::norm(psi.amps()[k]) * dx;
        for (int k1 = 0; k1 < n; ++k1)
            for (int k3 = 0; k3 < n; ++k3)
                w2[k1] += std::norm(epr.amps()[static_cast<size_t>(k1) * n + k3]) * dx * dx;
        p_a.assign(2 * n - 1, 0.0);
        for (int k = 0; k < n; ++k)
            for (int m = k; m < k + n; ++m) p_a[m] += w1[k] * w2[m - k];
    }

    double a_value(int m) const { return (m - n) * psi.grid().dx; }

    // stripe for sum bin m, transformed over the q axis; returns joint
    // probabilities P(m, j) and keeps the transformed stripe for extraction
    struct Stripe {
        std::vector<Complex> amps; // (j, k3), row-major
        std::vector<double> p_b;   // joint probability per momentum bin j
    };

    Stripe stripe(int m) const {
        const double dx = psi.grid().dx;
        Stripe st;
        st.amps.assign(static_cast<size_t>(n) * n, Complex{});
        int lo = std::max(0, m - n + 1), hi = std::min(n - 1, m);
        for (int k1 = lo; k1 <= hi; ++k1)
            for (int k3 = 0; k3 < n; ++k3)
                st.amps[static_cast<size_t>(k1) * n + k3] =
                    psi.amps()[k1] * epr.amps()[static_cast<size_t>(m - k1) * n + k3];
        transform_axis(st.amps, n, 2, 0, true);
        st.p_b.assign(n, 0.0);
        for (int j = 0; j < n; ++j)
            for (int k3 = 0; k3 < n; ++k3)
                st.p_b[j] += std::norm(st.amps[static_cast<size_t>(j) * n + k3]) * dx * dx * dx;
        return st;
    }

    OnewayBranch branch(int m, const Stripe& st, int j) const {
        double a = a_value(m);
        double b = psi.grid().p(j);
        std::vector<Complex> out(n);
        for (int k3 = 0; k3 < n; ++k3) out[k3] = st.amps[static_cast<size_t>(j) * n + k3];
        WaveFunction psi_out = WaveFunction::normalized(psi.grid(), {"out"}, std::move(out));

        WaveFunction target(psi.grid(), {"out"}, psi.amps());
        double fid_pre =
            overlap2(psi_out, analytic_oracle_output(target, a, b, ShiftDirection::Oneway));
        WaveFunction corrected = shift_correct(psi_out, "out", a, b, ShiftDirection::Oneway);
        double fid_post = overlap2(corrected, target);
        return {a, b, st.p_b[j], fid_pre, fid_post};
    }
};

proto::TeleportBranch to_branch(const OnewayBranch& br) {
    proto::TeleportBranch tb;
    tb.outcome = "a=" + fmt(br.a) + " b=" + fmt(br.b);
    tb.probability = br.prob;
    tb.fidelity_pre = br.fid_pre;
    tb.fidelity_post = br.fid_post;
    return tb;
}

} // namespace

proto::TeleportReport cv_teleport_oneway(const WaveFunction& psi_in, double r,
                                         CvRunOptions options) {
    OnewayEngine eng(psi_in, r);
    const int n = eng.n;

    proto::TeleportReport rep;
    rep.protocol = "cv-teleport";
    rep.seed = options.mode.seed;

    switch (options.mode.kind) {
    case MeasureMode::Kind::Enumerate: {
        rep.mode = "enumerate";
        double mass = 0.0, mean = 0.0;
        for (int m = 0; m < 2 * n - 1; ++m) {
            if (eng.p_a[m] <= options.branch_cutoff) continue;
            OnewayEngine::Stripe st = eng.stripe(m);
            for (int j = 0; j < n; ++j) {
                if (st.p_b[j] <= options.branch_cutoff) continue;
                OnewayBranch br = eng.branch(m, st, j);
                rep.branches.push_back(to_branch(br));
                mass += br.prob;
                mean += br.prob * br.fid_post;
            }
        }
        require(mass > 0.0, "no branch above the probability cutoff");
        rep.mean_fidelity = mean / mass;
        break;
    }
    case MeasureMode::Kind::Sample: {
        rep.mode = "sample";
        SplitMix64 rng(options.mode.seed);
        double mean = 0.0;
        for (int t = 0; t < options.trials; ++t) {
            double u = rng.uniform(), acc = 0.0;
            int m = 2 * n - 2;
            for (int c = 0; c < 2 * n - 1; ++c) {
                acc += eng.p_a[c];
                if (u < acc) {
                    m = c;
                    break;
                }
            }
            OnewayEngine::Stripe st = eng.stripe(m);
            double total = 0.0;
            for (double w : st.p_b) total += w;
            double u2 = rng.uniform() * total, acc2 = 0.0;
            int j = n - 1;
            for (int c = 0; c < n; ++c) {
                acc2 += st.p_b[c];
                if (u2 < acc2) {
                    j = c;
                    break;
                }
            }
            OnewayBranch br = eng.branch(m, st, j);
            rep.branches.push_back(to_branch(br));
            mean += br.fid_post;
        }
        rep.mean_fidelity = mean / options.trials;
        break;
    }
    case MeasureMode::Kind::Branch: {
        rep.mode = "branch";
        int want = options.mode.k, seen = 0;
        for (int m = 0; m < 2 * n - 1; ++m) {
            if (eng.p_a[m] <= options.branch_cutoff) continue;
            OnewayEngine::Stripe st = eng.stripe(m);
            for (int j = 0; j < n; ++j) {
                if (st.p_b[j] <= options.branch_cutoff) continue;
                if (seen++ == want) {
                    OnewayBranch br = eng.branch(m, st, j);
                    rep.branches.push_back(to_branch(br));
                    rep.mean_fidelity = br.fid_post;
                    return rep;
                }
            }
        }
        throw std::invalid_argument("branch index out of range");
    }
    }
    return rep;
}

// ---- crossed two-way swap ------------------------------------------------------

namespace {

struct CrossedEngine {
    const WaveFunction& psi1;
    const WaveFunction& psi2;
    WaveFunction joint; // (q1, q2, probe_a, probe_b) after all couplings
    int n;

    CrossedEngine(const WaveFunction& p1, const WaveFunction& p2, std::size_t budget)
        : psi1(p1), psi2(p2), joint(couple(p1, p2, budget)), n(p1.grid().n_points) {}

    static WaveFunction couple(const WaveFunction& p1, const WaveFunction& p2,
                               std::size_t budget) {
        require(p1.rank() == 1 && p2.rank() == 1, "payloads must be single modes");
        require(p1.grid() == p2.grid(), "payloads must share one grid");
        const Grid1D& g = p1.grid();
        check_budget(g.n_points, 4, budget);

        WaveFunction probe_a = WaveFunction::gaussian(g, "probe_a", 0.0, 2.0 * g.dx);
        // momentum pointer: sigma_p = 2 dp, so sigma_x = 1/(4 dp)
        WaveFunction probe_b = WaveFunction::gaussian(g, "probe_b", 0.0, 0.25 / g.dp());

        WaveFunction s = tensor_cv(tensor_cv(tensor_cv(rename(p1, "q1"), rename(p2, "q2"),
                                                       budget),
                                             probe_a, budget),
                                   probe_b, budget);
        // t1
        s = probe_couple(s, "q1", "probe_a", Quadrature::Q, +1);
        s = probe_couple(s, "q2", "probe_b", Quadrature::P, -1);
        // t2
        s = probe_couple(s, "q2", "probe_a", Quadrature::Q, -1);
        s = probe_couple(s, "q1", "probe_b", Quadrature::P, +1);
        return s;
    }

    static WaveFunction rename(const WaveFunction& w, const std::string& name) {
        return WaveFunction(w.grid(), {name}, w.amps());
    }
};

} // namespace

double crossed_probe_pointer_mean(const WaveFunction& psi1, const WaveFunction& psi2,
                                  std::size_t memory_budget) {
    CrossedEngine eng(psi1, psi2, memory_budget);
    return mode_mean_q(eng.joint, "probe_a");
}

proto::TeleportReport cv_crossed_swap(const WaveFunction& psi1, const WaveFunction& psi2,
                                      CvRunOptions options) {
    CrossedEngine eng(psi1, psi2, options.memory_budget);
    const int n = eng.n;
    const Grid1D& g = psi1.grid();

    auto a_obs = QuadratureObservable::q("probe_a");

    // probability of each probe-A position bin
    std::vector<CVOutcome> a_bins = quadrature_distribution(eng.joint, a_obs);

    // collapse probe_a onto bin ai and drop its axis, then rotate probe_b to
    // momentum; returns the rank-3 (q1,q2,probe_b~momentum) amplitudes and
    // the conditional distribution over probe-B momentum bins
    auto process = [&](size_t ai) {
        auto [a_out, after_a] =
            measure_quadrature(eng.joint, a_obs, MeasureMode::branch(static_cast<int>(ai)));
        int k_a = static_cast<int>(std::lround(a_out.value / g.dx)) + n / 2;
        WaveFunction sliced = slice_mode(after_a, "probe_a", k_a);
        std::vector<Complex> amps = sliced.amps();
        transform_axis(amps, n, 3, 2, true);
        std::vector<double> p_b(n, 0.0);
        double measure = std::pow(g.dx, 3.0);
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(amps.size()); ++i)
            p_b[i % n] += std::norm(amps[i]) * measure;
        return std::make_tuple(a_out, std::move(amps), std::move(p_b));
    };

    struct DirFids {
        double pre1, pre2, post1, post2;
    };

    auto branch_fids = [&](const std::vector<Complex>& amps_momentum, int j, double a,
                           double b) {
        // collapse probe_b to momentum bin j and drop it
        std::vector<Complex> pair(static_cast<size_t>(n) * n);
        for (int k1 = 0; k1 < n; ++k1)
            for (int k2 = 0; k2 < n; ++k2)
                pair[static_cast<size_t>(k1) * n + k2] =
                    amps_momentum[(static_cast<std::int64_t>(k1) * n + k2) * n + j];
        WaveFunction out_pair = WaveFunction::normalized(g, {"q1", "q2"}, std::move(pair));

        // per-direction outputs via the dominant fiber of the other mode
        std::vector<double> m1(n, 0.0), m2(n, 0.0);
        for (int k1 = 0; k1 < n; ++k1)
            for (int k2 = 0; k2 < n; ++k2) {
                double w = std::norm(out_pair.amps()[static_cast<size_t>(k1) * n + k2]);
                m1[k1] += w;
                m2[k2] += w;
            }
        int k2_star = static_cast<int>(std::max_element(m2.begin(), m2.end()) - m2.begin());
        int k1_star = static_cast<int>(std::max_element(m1.begin(), m1.end()) - m1.begin());
        std::vector<Complex> o1(n), o2(n);
        for (int k = 0; k < n; ++k) {
            o1[k] = out_pair.amps()[static_cast<size_t>(k) * n + k2_star];
            o2[k] = out_pair.amps()[static_cast<size_t>(k1_star) * n + k];
        }
        WaveFunction out1 = WaveFunction::normalized(g, {"q1"}, std::move(o1));
        WaveFunction out2 = WaveFunction::normalized(g, {"q2"}, std::move(o2));

        WaveFunction oracle1 = analytic_oracle_output(CrossedEngine::rename(psi2, "q1"), a, b,
                                                      ShiftDirection::Crossed1);
        WaveFunction oracle2 = analytic_oracle_output(CrossedEngine::rename(psi1, "q2"), a, b,
                                                      ShiftDirection::Crossed2);
        DirFids f;
        f.pre1 = overlap2(out1, oracle1);
        f.pre2 = overlap2(out2, oracle2);
        f.post1 = overlap2(shift_correct(out1, "q1", a, b, ShiftDirection::Crossed1),
                           CrossedEngine::rename(psi2, "q1"));
        f.post2 = overlap2(shift_correct(out2, "q2", a, b, ShiftDirection::Crossed2),
                           CrossedEngine::rename(psi1, "q2"));
        return f;
    };

    proto::TeleportReport rep;
    rep.protocol = "cv-swap";
    rep.seed = options.mode.seed;

    auto add_branch = [&](double a, double b, double prob, const DirFids& f) {
        proto::TeleportBranch tb;
        tb.outcome = "a=" + fmt(a) + " b=" + fmt(b);
        tb.probability = prob;
        tb.fidelity_pre = std::min(f.pre1, f.pre2);
        tb.fidelity_post = std::min(f.post1, f.post2);
        rep.branches.push_back(std::move(tb));
    };

    switch (options.mode.kind) {
    case MeasureMode::Kind::Enumerate: {
        rep.mode = "enumerate";
        double mass = 0.0, mean = 0.0, mean1 = 0.0, mean2 = 0.0;
        for (size_t ai = 0; ai < a_bins.size(); ++ai) {
            if (a_bins[ai].probability <= options.branch_cutoff) continue;
            auto [a_out, amps_p, p_b] = process(ai);
            for (int j = 0; j < n; ++j) {
                double prob = p_b[j] * a_out.probability;
                if (prob <= options.branch_cutoff) continue;
                DirFids f = branch_fids(amps_p, j, a_out.value, g.p(j));
                add_branch(a_out.value, g.p(j), prob, f);
                mass += prob;
                mean += prob * std::min(f.post1, f.post2);
                mean1 += prob * f.post1;
                mean2 += prob * f.post2;
            }
        }
        if (mass <= 0.0) throw std::runtime_error("no branch above the probability cutoff");
        rep.mean_fidelity = mean / mass;
        rep.direction_means = {mean1 / mass, mean2 / mass};
        break;
    }
    case MeasureMode::Kind::Sample: {
        rep.mode = "sample";
        SplitMix64 rng(options.mode.seed);
        double mean = 0.0, mean1 = 0.0, mean2 = 0.0;
        for (int t = 0; t < options.trials; ++t) {
            double u = rng.uniform(), acc = 0.0;
            size_t ai = a_bins.size() - 1;
            for (size_t c = 0; c < a_bins.size(); ++c) {
                acc += a_bins[c].probability;
                if (u < acc) {
                    ai = c;
                    break;
                }
            }
            auto [a_out, amps_p, p_b] = process(ai);
            double total = 0.0;
            for (double wv : p_b) total += wv;
            double u2 = rng.uniform() * total, acc2 = 0.0;
            int j = n - 1;
            for (int c = 0; c < n; ++c) {
                acc2 += p_b[c];
                if (u2 < acc2) {
                    j = c;
                    break;
                }
            }
            DirFids f = branch_fids(amps_p, j, a_out.value, g.p(j));
            add_branch(a_out.value, g.p(j), a_out.probability * p_b[j], f);
            mean += std::min(f.post1, f.post2);
            mean1 += f.post1;
            mean2 += f.post2;
        }
        rep.mean_fidelity = mean / options.trials;
        rep.direction_means = {mean1 / options.trials, mean2 / options.trials};
        break;
    }
    case MeasureMode::Kind::Branch:
        throw std::invalid_argument("cv_crossed_swap supports enumerate or sample modes");
    }
    return rep;
}

std::string WaveFunction::to_json() const {
    nlohmann::json j;
    j["grid"]["n_points"] = grid_.n_points;
    j["grid"]["dx"] = grid_.dx;
    j["modes"] = modes_;
    nlohmann::json amps = nlohmann::json::array();
    for (const Complex& a : amps_) amps.push_back({a.real(), a.imag()});
    j["amps"] = std::move(amps);
    return j.dump();
}

std::string WaveFunction::to_csv() const {
    require(rank() == 1, "CSV export covers single-mode wave functions");
    std::string out = "x,re,im\n";
    for (int k = 0; k < grid_.n_points; ++k) {
        out += fmt(grid_.x(k));
        out += ',';
        out += fmt(amps_[k].real());
        out += ',';
        out += fmt(amps_[k].imag());
        out += '\n';
    }
    return out;
}

} // namespace qtel::cv
