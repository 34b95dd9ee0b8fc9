#include "qtel/nogo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

namespace qtel::nogo {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const double kSupportTol = 1e-10;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Row pairing (X, Y, U, V, sign) per Bell state: the evolved two-particle
// state is (X (x) Y + sign * U (x) V)/sqrt2 in first-quantized form.
struct BellRows {
    const std::vector<Complex>*X, *Y, *U, *V;
    double sign;
};

BellRows bell_rows(const LinearEvolution& ev, BellOutcome kind) {
    switch (kind) {
    case BellOutcome::PsiMinus: return {&ev.a, &ev.d, &ev.b, &ev.c, -1.0};
    case BellOutcome::PsiPlus: return {&ev.a, &ev.d, &ev.b, &ev.c, +1.0};
    case BellOutcome::PhiMinus: return {&ev.a, &ev.c, &ev.b, &ev.d, -1.0};
    case BellOutcome::PhiPlus: return {&ev.a, &ev.c, &ev.b, &ev.d, +1.0};
    }
    throw std::invalid_argument("bad Bell outcome");
}

// Flat probability table used by the optimizer: one row of pattern
// probabilities per Bell state, identical pattern ordering across states.
struct ProbTable {
    int n_patterns = 0;
    std::array<std::vector<double>, 4> p;
};

int pattern_count(Statistics st, int n) {
    if (st == Statistics::Distinguishable) return n * n;
    if (st == Statistics::Boson) return n * (n + 1) / 2;
    return n * (n - 1) / 2;
}

// Probabilities for one Bell state written into out[]; ordering matches
// pattern_list().
void fill_probs(const LinearEvolution& ev, Statistics st, BellOutcome kind, double* out) {
    BellRows r = bell_rows(ev, kind);
    const auto &X = *r.X, &Y = *r.Y, &U = *r.U, &V = *r.V;
    const double s = r.sign;
    const int n = ev.n_modes;
    int idx = 0;
    if (st == Statistics::Distinguishable) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[idx++] = std::norm((X[i] * Y[j] + s * U[i] * V[j]) * kInvSqrt2);
    } else if (st == Statistics::Boson) {
        for (int i = 0; i < n; ++i) {
            out[idx++] = std::norm(X[i] * Y[i] + s * U[i] * V[i]);
            for (int j = i + 1; j < n; ++j)
                out[idx++] = std::norm(
                    (X[i] * Y[j] + X[j] * Y[i] + s * (U[i] * V[j] + U[j] * V[i])) * kInvSqrt2);
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                out[idx++] = std::norm(
                    (X[i] * Y[j] - X[j] * Y[i] + s * (U[i] * V[j] - U[j] * V[i])) * kInvSqrt2);
    }
}

ProbTable prob_table(const LinearEvolution& ev, Statistics st) {
    ProbTable t;
    t.n_patterns = pattern_count(st, ev.n_modes);
    for (int k = 0; k < 4; ++k) {
        t.p[k].resize(t.n_patterns);
        fill_probs(ev, st, bell::kAllBellOutcomes[k], t.p[k].data());
    }
    return t;
}

std::vector<Pattern> pattern_list(Statistics st, int n) {
    std::vector<Pattern> pats;
    if (st == Statistics::Distinguishable) {
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) pats.push_back({i, j});
    } else if (st == Statistics::Boson) {
        for (int i = 1; i <= n; ++i)
            for (int j = i; j <= n; ++j) pats.push_back({i, j});
    } else {
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) pats.push_back({i, j});
    }
    return pats;
}

double hard_success(const ProbTable& t, double tol) {
    double total = 0.0;
    for (int pat = 0; pat < t.n_patterns; ++pat)
        for (int k = 0; k < 4; ++k) {
            if (t.p[k][pat] < tol) continue;
            bool unique = true;
            for (int k2 = 0; k2 < 4 && unique; ++k2)
                if (k2 != k && t.p[k2][pat] >= tol) unique = false;
            if (unique) total += t.p[k][pat];
        }
    return total / 4.0;
}

// Smooth surrogate for the hard indicator "all competing probabilities
// vanish": weight T/(T + competitors) approaches the indicator as T -> 0 and
// keeps gradients alive at any competitor magnitude.
double soft_success(const ProbTable& t, double temperature) {
    double total = 0.0;
    for (int pat = 0; pat < t.n_patterns; ++pat) {
        double sum = t.p[0][pat] + t.p[1][pat] + t.p[2][pat] + t.p[3][pat];
        for (int k = 0; k < 4; ++k)
            total += t.p[k][pat] * temperature / (temperature + (sum - t.p[k][pat]));
    }
    return total / 4.0;
}

// ---- parameterization ---------------------------------------------------

Eigen::MatrixXcd anti_hermitian(const std::vector<double>& theta, int n) {
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i) k(i, i) = Complex(0.0, theta[idx++]);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            k(i, j) = Complex(theta[idx], theta[idx + 1]);
            k(j, i) = Complex(-theta[idx], theta[idx + 1]);
            idx += 2;
        }
    return k;
}

// Gram-Schmidt over the four rows with a deterministic fallback basis vector
// when masking degenerates a row.
void orthonormalize_rows(std::array<std::vector<Complex>, 4>& rows, int n, Statistics st) {
    auto dot = [n](const std::vector<Complex>& x, const std::vector<Complex>& y) {
        Complex acc{};
        for (int i = 0; i < n; ++i) acc += std::conj(x[i]) * y[i];
        return acc;
    };
    for (int k = 0; k < 4; ++k) {
        for (int prev = 0; prev < k; ++prev) {
            Complex c = dot(rows[prev], rows[k]);
            for (int i = 0; i < n; ++i) rows[k][i] -= c * rows[prev][i];
        }
        double norm = std::sqrt(std::real(dot(rows[k], rows[k])));
        if (norm < 1e-8) {
            int lo = 0, hi = n;
            if (st == Statistics::Distinguishable) {
                lo = (k < 2) ? 0 : n / 2;
                hi = (k < 2) ? n / 2 : n;
            }
            for (int m = lo; m < hi; ++m) {
                std::fill(rows[k].begin(), rows[k].end(), Complex{});
                rows[k][m] = 1.0;
                for (int prev = 0; prev < k; ++prev) {
                    Complex c = dot(rows[prev], rows[k]);
                    for (int i = 0; i < n; ++i) rows[k][i] -= c * rows[prev][i];
                }
                norm = std::sqrt(std::real(dot(rows[k], rows[k])));
                if (norm > 0.5) break;
            }
        }
        for (int i = 0; i < n; ++i) rows[k][i] /= norm;
    }
}

LinearEvolution rows_from_theta(const std::vector<double>& theta, int n, Statistics st) {
    Eigen::MatrixXcd u = anti_hermitian(theta, n).exp();
    std::array<std::vector<Complex>, 4> rows;
    for (int k = 0; k < 4; ++k) {
        rows[k].resize(n);
        for (int i = 0; i < n; ++i) rows[k][i] = u(k, i);
    }
    if (st == Statistics::Distinguishable) {
        for (int k = 0; k < 4; ++k) {
            int lo = (k < 2) ? n / 2 : 0;
            int hi = (k < 2) ? n : n / 2;
            for (int i = lo; i < hi; ++i) rows[k][i] = Complex{};
        }
        orthonormalize_rows(rows, n, st);
    }
    LinearEvolution ev;
    ev.n_modes = n;
    ev.a = std::move(rows[0]);
    ev.b = std::move(rows[1]);
    ev.c = std::move(rows[2]);
    ev.d = std::move(rows[3]);
    return ev;
}

// ---- polish: zero the competing amplitudes of dominated patterns ----------

struct Residuals {
    std::vector<std::pair<int, int>> targets; // (pattern index, competing state)
    int size() const { return static_cast<int>(targets.size()) * 2; }
};

void fill_amps(const LinearEvolution& ev, Statistics st, BellOutcome kind,
               std::vector<Complex>& out) {
    BellRows r = bell_rows(ev, kind);
    const auto &X = *r.X, &Y = *r.Y, &U = *r.U, &V = *r.V;
    const double s = r.sign;
    const int n = ev.n_modes;
    int idx = 0;
    out.resize(pattern_count(st, n));
    if (st == Statistics::Distinguishable) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out[idx++] = (X[i] * Y[j] + s * U[i] * V[j]) * kInvSqrt2;
    } else if (st == Statistics::Boson) {
        for (int i = 0; i < n; ++i) {
            out[idx++] = X[i] * Y[i] + s * U[i] * V[i];
            for (int j = i + 1; j < n; ++j)
                out[idx++] =
                    (X[i] * Y[j] + X[j] * Y[i] + s * (U[i] * V[j] + U[j] * V[i])) * kInvSqrt2;
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                out[idx++] =
                    (X[i] * Y[j] - X[j] * Y[i] + s * (U[i] * V[j] - U[j] * V[i])) * kInvSqrt2;
    }
}

Eigen::VectorXd residual_vector(const std::vector<double>& theta, int n, Statistics st,
                                const Residuals& res) {
    LinearEvolution ev = rows_from_theta(theta, n, st);
    std::array<std::vector<Complex>, 4> amps;
    for (int k = 0; k < 4; ++k) fill_amps(ev, st, bell::kAllBellOutcomes[k], amps[k]);
    Eigen::VectorXd r(res.size());
    for (size_t t = 0; t < res.targets.size(); ++t) {
        Complex a = amps[res.targets[t].second][res.targets[t].first];
        r(2 * t) = a.real();
        r(2 * t + 1) = a.imag();
    }
    return r;
}

std::vector<double> gauss_newton_polish(std::vector<double> theta, int n, Statistics st,
                                        const Residuals& res, int max_iters) {
    const int np = static_cast<int>(theta.size());
    double lambda = 1e-10;
    Eigen::VectorXd r = residual_vector(theta, n, st, res);
    double f = r.squaredNorm();
    for (int iter = 0; iter < max_iters && f > 1e-28; ++iter) {
        Eigen::MatrixXd jac(res.size(), np);
        const double h = 1e-7;
        for (int p = 0; p < np; ++p) {
            std::vector<double> tp = theta;
            tp[p] += h;
            jac.col(p) = (residual_vector(tp, n, st, res) - r) / h;
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtr = jac.transpose() * r;
        bool accepted = false;
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::MatrixXd m = jtj + lambda * Eigen::MatrixXd::Identity(np, np);
            Eigen::VectorXd delta = m.ldlt().solve(-jtr);
            std::vector<double> cand = theta;
            for (int p = 0; p < np; ++p) cand[p] += delta(p);
            Eigen::VectorXd rc = residual_vector(cand, n, st, res);
            double fc = rc.squaredNorm();
            if (fc < f) {
                theta = std::move(cand);
                r = std::move(rc);
                f = fc;
                lambda = std::max(lambda * 0.25, 1e-14);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) break;
    }
    return theta;
}

} // namespace

const char* to_string(Statistics st) {
    switch (st) {
    case Statistics::Distinguishable: return "distinguishable";
    case Statistics::Boson: return "boson";
    case Statistics::Fermion: return "fermion";
    }
    return "?";
}

Statistics statistics_from_string(const std::string& name) {
    if (name == "distinguishable") return Statistics::Distinguishable;
    if (name == "boson") return Statistics::Boson;
    if (name == "fermion") return Statistics::Fermion;
    throw std::invalid_argument("unknown statistics: " + name);
}

std::string to_string(const Pattern& p) {
    return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

const std::vector<Complex>& LinearEvolution::row(int k) const {
    switch (k) {
    case 0: return a;
    case 1: return b;
    case 2: return c;
    default: return d;
    }
}

void LinearEvolution::validate(Statistics st) const {
    require(n_modes >= 4, "linear evolution needs at least four output modes");
    for (int k = 0; k < 4; ++k)
        require(static_cast<int>(row(k).size()) == n_modes, "row length mismatch");
    for (int k1 = 0; k1 < 4; ++k1)
        for (int k2 = k1; k2 < 4; ++k2) {
            Complex acc{};
            for (int i = 0; i < n_modes; ++i) acc += std::conj(row(k1)[i]) * row(k2)[i];
            Complex want = (k1 == k2) ? 1.0 : 0.0;
            require(std::abs(acc - want) <= kNormTol, "rows are not orthonormal");
        }
    if (st == Statistics::Distinguishable) {
        for (int i = 0; i < n_modes; ++i) {
            bool left = std::abs(a[i]) > kSupportTol || std::abs(b[i]) > kSupportTol;
            bool right = std::abs(c[i]) > kSupportTol || std::abs(d[i]) > kSupportTol;
            require(!(left && right),
                    "distinguishable particles require disjoint supports for {a,b} and {c,d}");
        }
    }
}

LinearEvolution LinearEvolution::beam_splitter_scheme() {
    LinearEvolution ev;
    ev.n_modes = 4;
    ev.a = {kInvSqrt2, 0, kInvSqrt2, 0};
    ev.b = {0, kInvSqrt2, 0, kInvSqrt2};
    ev.c = {kInvSqrt2, 0, -kInvSqrt2, 0};
    ev.d = {0, kInvSqrt2, 0, -kInvSqrt2};
    return ev;
}

LinearEvolution LinearEvolution::identity_scheme(int n_modes) {
    require(n_modes >= 4, "identity scheme needs at least four modes");
    LinearEvolution ev;
    ev.n_modes = n_modes;
    ev.a.assign(n_modes, Complex{});
    ev.b.assign(n_modes, Complex{});
    ev.c.assign(n_modes, Complex{});
    ev.d.assign(n_modes, Complex{});
    ev.a[0] = 1.0;
    ev.b[1] = 1.0;
    ev.c[n_modes / 2] = 1.0;
    ev.d[n_modes / 2 + 1] = 1.0;
    return ev;
}

OutcomeAmplitudes evolve_bell(const LinearEvolution& ev, Statistics st, BellOutcome kind) {
    ev.validate(st);
    std::vector<Complex> amps;
    fill_amps(ev, st, kind, amps);
    OutcomeAmplitudes out;
    auto pats = pattern_list(st, ev.n_modes);
    for (size_t i = 0; i < pats.size(); ++i) out[pats[i]] = amps[i];
    return out;
}

std::map<Pattern, double> detection_distribution(const LinearEvolution& ev, Statistics st,
                                                 BellOutcome kind) {
    std::map<Pattern, double> out;
    for (const auto& [pat, amp] : evolve_bell(ev, st, kind)) out[pat] = std::norm(amp);
    return out;
}

Complex ordered_pair_coefficient(const LinearEvolution& ev, Statistics st, BellOutcome kind,
                                 int i, int j) {
    ev.validate(st);
    require(i >= 1 && i <= ev.n_modes && j >= 1 && j <= ev.n_modes, "mode index out of range");
    BellRows r = bell_rows(ev, kind);
    const auto &X = *r.X, &Y = *r.Y, &U = *r.U, &V = *r.V;
    const double s = r.sign;
    const int ii = i - 1, jj = j - 1;
    if (st == Statistics::Distinguishable)
        return (X[ii] * Y[jj] + s * U[ii] * V[jj]) * kInvSqrt2;
    double ex = (st == Statistics::Fermion) ? -1.0 : 1.0;
    return 0.5 * (X[ii] * Y[jj] + ex * Y[ii] * X[jj] + s * (U[ii] * V[jj] + ex * V[ii] * U[jj]));
}

DiscriminationReport discrimination_success(const LinearEvolution& ev, Statistics st,
                                            double tol) {
    ev.validate(st);
    ProbTable t = prob_table(ev, st);
    auto pats = pattern_list(st, ev.n_modes);

    DiscriminationReport rep;
    for (int pat = 0; pat < t.n_patterns; ++pat) {
        std::vector<BellOutcome> consistent;
        for (int k = 0; k < 4; ++k)
            if (t.p[k][pat] >= tol) consistent.push_back(bell::kAllBellOutcomes[k]);
        if (consistent.size() == 1)
            rep.per_state[static_cast<int>(consistent[0])] +=
                t.p[static_cast<int>(consistent[0])][pat];
        if (!consistent.empty()) rep.partition[pats[pat]] = std::move(consistent);
    }
    for (double v : rep.per_state) rep.success += v;
    rep.success /= 4.0;
    return rep;
}

OptimizeResult optimize_discrimination(Statistics st, int n_modes, int restarts,
                                       std::uint64_t seed, OptimizeOptions opt) {
    require(n_modes >= 4, "n_modes must be >= 4");
    require(restarts >= 1, "restarts must be >= 1");
    if (st == Statistics::Distinguishable)
        require(n_modes % 2 == 0, "distinguishable optimization needs an even mode count");

    const int np = n_modes * n_modes;
    const double hard_tol = 1e-9;

    auto soft_at = [&](const std::vector<double>& theta, double temp) {
        return soft_success(prob_table(rows_from_theta(theta, n_modes, st), st), temp);
    };
    auto hard_at = [&](const std::vector<double>& theta) {
        return hard_success(prob_table(rows_from_theta(theta, n_modes, st), st), hard_tol);
    };

    struct Candidate {
        std::vector<double> theta;
        double hard;
        double soft;
        int restart;
    };
    std::vector<Candidate> candidates;
    std::vector<double> trace;
    trace.reserve(restarts);
    double best_so_far = -1.0;

    for (int r = 0; r < restarts; ++r) {
        SplitMix64 rng = SplitMix64::sub(seed, static_cast<std::uint64_t>(r));
        std::vector<double> theta(np);
        for (double& x : theta) x = 0.7 * rng.gaussian();

        double temp = opt.t_start;
        for (int stage = 0; stage < opt.stages; ++stage, temp = std::max(temp * 0.5, opt.t_final)) {
            double current = soft_at(theta, temp);
            for (int it = 0; it < opt.steps; ++it) {
                std::vector<double> grad(np);
                double gnorm2 = 0.0;
                for (int p = 0; p < np; ++p) {
                    std::vector<double> tp = theta;
                    tp[p] += opt.fd_step;
                    double up = soft_at(tp, temp);
                    tp[p] -= 2.0 * opt.fd_step;
                    double dn = soft_at(tp, temp);
                    grad[p] = (up - dn) / (2.0 * opt.fd_step);
                    gnorm2 += grad[p] * grad[p];
                }
                if (gnorm2 < 1e-22) break;
                double gnorm = std::sqrt(gnorm2);
                double step = 0.25;
                bool moved = false;
                for (int bt = 0; bt < 14; ++bt, step *= 0.5) {
                    std::vector<double> cand = theta;
                    for (int p = 0; p < np; ++p) cand[p] += step * grad[p] / gnorm;
                    double val = soft_at(cand, temp);
                    if (val > current + 1e-14) {
                        theta = std::move(cand);
                        current = val;
                        moved = true;
                        break;
                    }
                }
                if (!moved) break;
            }
        }

        double hard = hard_at(theta);
        double soft = soft_at(theta, opt.t_final);
        candidates.push_back({std::move(theta), hard, soft, r});
        best_so_far = std::max(best_so_far, hard);
        trace.push_back(best_so_far);
    }

    // Refine the most promising coarse results to machine precision: pick the
    // patterns one state dominates and solve for exactly vanishing
    // competitors by damped Gauss-Newton.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) {
                         if (x.hard != y.hard) return x.hard > y.hard;
                         if (x.soft != y.soft) return x.soft > y.soft;
                         return x.restart < y.restart;
                     });
    int n_polish = std::min<int>(opt.polish_top, static_cast<int>(candidates.size()));
    std::vector<double> best_theta = candidates[0].theta;
    double best_hard = candidates[0].hard;
    int best_restart = candidates[0].restart;

    for (int c = 0; c < n_polish; ++c) {
        const auto& cand = candidates[c];
        ProbTable t = prob_table(rows_from_theta(cand.theta, n_modes, st), st);
        Residuals res;
        for (int pat = 0; pat < t.n_patterns; ++pat) {
            int leader = 0;
            for (int k = 1; k < 4; ++k)
                if (t.p[k][pat] > t.p[leader][pat]) leader = k;
            if (t.p[leader][pat] < 0.01) continue;
            double competitors = 0.0;
            for (int k = 0; k < 4; ++k)
                if (k != leader) competitors += t.p[k][pat];
            if (competitors > 0.35 * t.p[leader][pat]) continue;
            for (int k = 0; k < 4; ++k)
                if (k != leader) res.targets.push_back({pat, k});
        }
        if (res.targets.empty()) continue;
        std::vector<double> polished =
            gauss_newton_polish(cand.theta, n_modes, st, res, opt.polish_iters);
        double hard = hard_at(polished);
        bool better = hard > best_hard + 1e-15 ||
                      (std::abs(hard - best_hard) <= 1e-15 && cand.restart < best_restart);
        if (better) {
            best_theta = std::move(polished);
            best_hard = hard;
            best_restart = cand.restart;
        }
    }

    OptimizeResult result;
    result.best = rows_from_theta(best_theta, n_modes, st);
    result.report = discrimination_success(result.best, st, hard_tol);
    result.trace = std::move(trace);
    return result;
}

Certificate certify_no_perfect(Statistics st, int n_modes, int restarts, std::uint64_t seed,
                               OptimizeOptions opt) {
    OptimizeResult r = optimize_discrimination(st, n_modes, restarts, seed, opt);
    Certificate cert;
    cert.statistics = st;
    cert.n_modes = n_modes;
    cert.restarts = restarts;
    cert.seed = seed;
    cert.max_success = r.report.success;
    cert.gap_to_one = 1.0 - r.report.success;
    return cert;
}

std::string Certificate::to_json() const {
    nlohmann::json j;
    j["statistics"] = to_string(statistics);
    j["n_modes"] = n_modes;
    j["restarts"] = restarts;
    j["seed"] = seed;
    j["max_success"] = max_success;
    j["gap_to_one"] = gap_to_one;
    return j.dump();
}

LinearEvolution random_evolution(Statistics st, int n_modes, SplitMix64& rng) {
    require(n_modes >= 4, "n_modes must be >= 4");
    if (st == Statistics::Distinguishable)
        require(n_modes % 2 == 0, "distinguishable evolutions need an even mode count");
    std::array<std::vector<Complex>, 4> rows;
    for (int k = 0; k < 4; ++k) {
        rows[k].resize(n_modes);
        int lo = 0, hi = n_modes;
        if (st == Statistics::Distinguishable) {
            lo = (k < 2) ? 0 : n_modes / 2;
            hi = (k < 2) ? n_modes / 2 : n_modes;
        }
        for (int i = lo; i < hi; ++i) rows[k][i] = Complex(rng.gaussian(), rng.gaussian());
    }
    orthonormalize_rows(rows, n_modes, st);
    LinearEvolution ev;
    ev.n_modes = n_modes;
    ev.a = std::move(rows[0]);
    ev.b = std::move(rows[1]);
    ev.c = std::move(rows[2]);
    ev.d = std::move(rows[3]);
    return ev;
}

namespace {
nlohmann::json row_to_json(const std::vector<Complex>& row) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Complex& x : row) arr.push_back({x.real(), x.imag()});
    return arr;
}

std::vector<Complex> row_from_json(const nlohmann::json& arr) {
    std::vector<Complex> row;
    for (const auto& pair : arr) row.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return row;
}
} // namespace

std::string LinearEvolution::to_json() const {
    nlohmann::json j;
    j["n_modes"] = n_modes;
    j["rows"]["a"] = row_to_json(a);
    j["rows"]["b"] = row_to_json(b);
    j["rows"]["c"] = row_to_json(c);
    j["rows"]["d"] = row_to_json(d);
    return j.dump();
}

LinearEvolution LinearEvolution::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    LinearEvolution ev;
    ev.n_modes = j.at("n_modes").get<int>();
    ev.a = row_from_json(j.at("rows").at("a"));
    ev.b = row_from_json(j.at("rows").at("b"));
    ev.c = row_from_json(j.at("rows").at("c"));
    ev.d = row_from_json(j.at("rows").at("d"));
    return ev;
}

} // namespace qtel::nogo
