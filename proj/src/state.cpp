#include "qtel/state.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace qtel {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::vector<std::int64_t> strides_of(const std::vector<int>& dims) {
    std::vector<std::int64_t> s(dims.size());
    std::int64_t acc = 1;
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
        s[i] = acc;
        acc *= dims[i];
    }
    return s;
}

// Flat-index bookkeeping for operations on a subset of axes: offsets of every
// target-digit combination plus base offsets of every rest-combination.
struct AxisSelection {
    std::vector<int> target_axes;
    std::vector<int> target_dims;
    std::int64_t sub_dim = 1;
    std::vector<std::int64_t> sub_offsets;
    std::vector<std::int64_t> rest_bases;

    AxisSelection(const CompositeSpace& space, const std::vector<std::string>& targets) {
        std::set<std::string> seen;
        for (const auto& t : targets) {
            require(seen.insert(t).second, "duplicate target label: " + t);
            target_axes.push_back(space.axis(t));
        }
        auto strides = strides_of(space.dims());
        for (int ax : target_axes) {
            target_dims.push_back(space.dim(ax));
            sub_dim *= space.dim(ax);
        }

        sub_offsets.assign(sub_dim, 0);
        for (std::int64_t j = 0; j < sub_dim; ++j) {
            std::int64_t rem = j, off = 0;
            for (int t = static_cast<int>(target_axes.size()) - 1; t >= 0; --t) {
                off += (rem % target_dims[t]) * strides[target_axes[t]];
                rem /= target_dims[t];
            }
            sub_offsets[j] = off;
        }

        std::vector<int> rest_axes;
        for (int ax = 0; ax < space.num_subsystems(); ++ax)
            if (std::find(target_axes.begin(), target_axes.end(), ax) == target_axes.end())
                rest_axes.push_back(ax);
        std::int64_t rest_dim = space.total_dim() / sub_dim;
        rest_bases.assign(rest_dim, 0);
        for (std::int64_t r = 0; r < rest_dim; ++r) {
            std::int64_t rem = r, base = 0;
            for (int t = static_cast<int>(rest_axes.size()) - 1; t >= 0; --t) {
                int ax = rest_axes[t];
                base += (rem % space.dim(ax)) * strides[ax];
                rem /= space.dim(ax);
            }
            rest_bases[r] = base;
        }
    }
};

} // namespace

Matrix Matrix::identity(int dim) {
    Matrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

Matrix Matrix::mul(const Matrix& rhs) const {
    require(n == rhs.n, "matrix dimension mismatch");
    Matrix m(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            Complex aik = (*this)(i, k);
            if (aik == Complex{}) continue;
            for (int j = 0; j < n; ++j) m(i, j) += aik * rhs(k, j);
        }
    return m;
}

bool Matrix::is_unitary(double tol) const {
    Matrix p = adjoint().mul(*this);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Complex want = (i == j) ? Complex{1.0, 0.0} : Complex{};
            if (std::abs(p(i, j) - want) > tol) return false;
        }
    return true;
}

CompositeSpace::CompositeSpace(std::vector<int> dims, std::vector<std::string> labels)
    : dims_(std::move(dims)), labels_(std::move(labels)) {
    require(dims_.size() == labels_.size(), "dims/labels size mismatch");
    require(!dims_.empty(), "empty composite space");
    for (int d : dims_) require(d >= 2, "subsystem dimension must be >= 2");
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        require(!l.empty(), "empty subsystem label");
        require(seen.insert(l).second, "duplicate subsystem label: " + l);
    }
}

std::int64_t CompositeSpace::total_dim() const {
    std::int64_t d = 1;
    for (int x : dims_) d *= x;
    return d;
}

int CompositeSpace::axis(const std::string& label) const {
    for (int i = 0; i < num_subsystems(); ++i)
        if (labels_[i] == label) return i;
    throw std::invalid_argument("unknown subsystem label: " + label);
}

bool CompositeSpace::has_label(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::int64_t CompositeSpace::stride(int axis) const {
    std::int64_t s = 1;
    for (int i = axis + 1; i < num_subsystems(); ++i) s *= dims_[i];
    return s;
}

StateVector::StateVector(CompositeSpace space, std::vector<Complex> amps)
    : space_(std::move(space)), amps_(std::move(amps)) {
    require(static_cast<std::int64_t>(amps_.size()) == space_.total_dim(),
            "amplitude vector length does not match space dimension");
    double n2 = 0.0;
    for (const Complex& a : amps_) {
        require(std::isfinite(a.real()) && std::isfinite(a.imag()),
                "non-finite amplitude");
        n2 += std::norm(a);
    }
    require(std::abs(std::sqrt(n2) - 1.0) <= kNormTol, "state vector is not normalized");
}

StateVector StateVector::normalized(CompositeSpace space, std::vector<Complex> amps) {
    double n2 = 0.0;
    for (const Complex& a : amps) n2 += std::norm(a);
    require(n2 > 1e-28, "cannot normalize a zero vector");
    double inv = 1.0 / std::sqrt(n2);
    for (Complex& a : amps) a *= inv;
    return StateVector(std::move(space), std::move(amps));
}

StateVector StateVector::basis(CompositeSpace space, std::int64_t index) {
    require(index >= 0 && index < space.total_dim(), "basis index out of range");
    std::vector<Complex> amps(space.total_dim());
    amps[index] = 1.0;
    return StateVector(std::move(space), std::move(amps));
}

double StateVector::norm() const {
    double n2 = 0.0;
    for (const Complex& a : amps_) n2 += std::norm(a);
    return std::sqrt(n2);
}

StateVector make_qubit(const std::string& label, Complex a0, Complex a1) {
    return StateVector::normalized(CompositeSpace({2}, {label}), {a0, a1});
}

Operator::Operator(std::vector<std::string> targets_, Matrix m, bool unitary_)
    : targets(std::move(targets_)), matrix(std::move(m)), unitary(unitary_) {
    require(!targets.empty(), "operator needs at least one target");
    if (unitary) require(matrix.is_unitary(), "operator flagged unitary fails U†U = 1");
}

MeasurementBasis MeasurementBasis::computational(std::vector<std::string> targets,
                                                 const std::vector<int>& dims) {
    int d = 1;
    for (int x : dims) d *= x;
    MeasurementBasis b;
    b.targets = std::move(targets);
    b.columns = Matrix::identity(d);
    return b;
}

StateVector tensor(const StateVector& s1, const StateVector& s2) {
    for (const auto& l : s2.space().labels())
        require(!s1.space().has_label(l), "duplicate label in tensor product: " + l);
    std::vector<int> dims = s1.space().dims();
    dims.insert(dims.end(), s2.space().dims().begin(), s2.space().dims().end());
    std::vector<std::string> labels = s1.space().labels();
    labels.insert(labels.end(), s2.space().labels().begin(), s2.space().labels().end());

    std::vector<Complex> amps;
    amps.reserve(s1.amps().size() * s2.amps().size());
    for (const Complex& a : s1.amps())
        for (const Complex& b : s2.amps()) amps.push_back(a * b);
    return StateVector(CompositeSpace(std::move(dims), std::move(labels)), std::move(amps));
}

StateVector apply(const Operator& op, const StateVector& s) {
    AxisSelection sel(s.space(), op.targets);
    require(op.matrix.n == sel.sub_dim, "operator matrix does not match target dimensions");

    std::vector<Complex> out(s.amps());
    std::vector<Complex> v(sel.sub_dim), y(sel.sub_dim);
    for (std::int64_t base : sel.rest_bases) {
        for (std::int64_t j = 0; j < sel.sub_dim; ++j) v[j] = s.amps()[base + sel.sub_offsets[j]];
        for (std::int64_t i = 0; i < sel.sub_dim; ++i) {
            Complex acc{};
            for (std::int64_t j = 0; j < sel.sub_dim; ++j)
                acc += op.matrix(static_cast<int>(i), static_cast<int>(j)) * v[j];
            y[i] = acc;
        }
        for (std::int64_t i = 0; i < sel.sub_dim; ++i) out[base + sel.sub_offsets[i]] = y[i];
    }
    return StateVector::normalized(s.space(), std::move(out));
}

std::vector<MeasurementBranch> measure(const StateVector& s, const MeasurementBasis& basis,
                                       MeasureMode mode) {
    require(!basis.targets.empty(), "measurement needs at least one target");
    AxisSelection sel(s.space(), basis.targets);
    int d = static_cast<int>(sel.sub_dim);
    require(basis.columns.n == d, "basis dimension does not match targets");
    require(basis.columns.is_unitary(kNormTol), "measurement basis is not orthonormal");

    std::vector<int> outcome_of = basis.outcome_of;
    if (outcome_of.empty()) {
        outcome_of.resize(d);
        for (int k = 0; k < d; ++k) outcome_of[k] = k;
    }
    require(static_cast<int>(outcome_of.size()) == d, "outcome grouping size mismatch");

    // Rotate target axes into the measurement basis; column k becomes |k>.
    Operator to_basis(basis.targets, basis.columns.adjoint(), false);
    StateVector c = apply(to_basis, s);

    std::vector<int> outcomes(outcome_of.begin(), outcome_of.end());
    std::sort(outcomes.begin(), outcomes.end());
    outcomes.erase(std::unique(outcomes.begin(), outcomes.end()), outcomes.end());

    Operator from_basis(basis.targets, basis.columns, false);
    std::vector<MeasurementBranch> branches;
    for (int o : outcomes) {
        double p = 0.0;
        std::vector<Complex> masked(c.amps().size());
        for (std::int64_t base : sel.rest_bases)
            for (int k = 0; k < d; ++k)
                if (outcome_of[k] == o) {
                    std::int64_t idx = base + sel.sub_offsets[k];
                    masked[idx] = c.amps()[idx];
                    p += std::norm(masked[idx]);
                }
        if (p <= kBranchEps) continue;
        StateVector post = apply(from_basis, StateVector::normalized(s.space(), std::move(masked)));
        branches.push_back({o, p, std::move(post)});
    }

    switch (mode.kind) {
    case MeasureMode::Kind::Enumerate:
        return branches;
    case MeasureMode::Kind::Sample: {
        SplitMix64 rng(mode.seed);
        double u = rng.uniform(), acc = 0.0;
        for (const auto& b : branches) {
            acc += b.probability;
            if (u < acc) return {b};
        }
        return {branches.back()};
    }
    case MeasureMode::Kind::Branch:
        require(mode.k >= 0 && mode.k < static_cast<int>(branches.size()),
                "branch index out of range");
        return {branches[static_cast<size_t>(mode.k)]};
    }
    return branches;
}

Complex inner_product(const StateVector& s1, const StateVector& s2) {
    require(s1.space() == s2.space(), "inner product requires identical spaces");
    Complex acc{};
    for (size_t i = 0; i < s1.amps().size(); ++i)
        acc += std::conj(s1.amps()[i]) * s2.amps()[i];
    return acc;
}

double fidelity(const StateVector& s1, const StateVector& s2) {
    return std::norm(inner_product(s1, s2));
}

StateVector permute(const StateVector& s, const std::vector<std::string>& new_order) {
    require(new_order.size() == s.space().labels().size(),
            "permutation must mention every subsystem exactly once");
    std::vector<int> perm;
    std::vector<int> new_dims;
    for (const auto& l : new_order) {
        perm.push_back(s.space().axis(l));
        new_dims.push_back(s.space().dim(perm.back()));
    }
    std::set<int> uniq(perm.begin(), perm.end());
    require(static_cast<int>(uniq.size()) == s.space().num_subsystems(),
            "permutation must mention every subsystem exactly once");

    auto old_strides = strides_of(s.space().dims());
    std::vector<Complex> out(s.amps().size());
    std::vector<int> digit(new_order.size(), 0);
    std::int64_t old_idx = 0;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(out.size()); ++i) {
        out[i] = s.amps()[old_idx];
        for (int ax = static_cast<int>(new_order.size()) - 1; ax >= 0; --ax) {
            if (++digit[ax] < new_dims[ax]) {
                old_idx += old_strides[perm[ax]];
                break;
            }
            old_idx -= old_strides[perm[ax]] * (new_dims[ax] - 1);
            digit[ax] = 0;
        }
    }
    return StateVector(CompositeSpace(new_dims, new_order), std::move(out));
}

StateVector relabel(const StateVector& s, const std::string& from, const std::string& to) {
    int ax = s.space().axis(from);
    require(!s.space().has_label(to) || from == to, "relabel target already exists: " + to);
    std::vector<std::string> labels = s.space().labels();
    labels[ax] = to;
    return StateVector(CompositeSpace(s.space().dims(), std::move(labels)), s.amps());
}

std::pair<StateVector, StateVector> split_off(const StateVector& s,
                                              const std::vector<std::string>& labels) {
    AxisSelection sel(s.space(), labels);
    require(sel.sub_dim < s.space().total_dim(), "cannot split off the whole space");

    std::int64_t best_t = 0;
    double best_w = -1.0;
    for (std::int64_t t = 0; t < sel.sub_dim; ++t) {
        double w = 0.0;
        for (std::int64_t base : sel.rest_bases) w += std::norm(s.amps()[base + sel.sub_offsets[t]]);
        if (w > best_w) {
            best_w = w;
            best_t = t;
        }
    }

    std::int64_t rest_dim = static_cast<std::int64_t>(sel.rest_bases.size());
    std::vector<Complex> rest(rest_dim);
    double inv = 1.0 / std::sqrt(best_w);
    for (std::int64_t r = 0; r < rest_dim; ++r)
        rest[r] = s.amps()[sel.rest_bases[r] + sel.sub_offsets[best_t]] * inv;

    std::vector<Complex> sub(sel.sub_dim);
    for (std::int64_t t = 0; t < sel.sub_dim; ++t) {
        Complex acc{};
        for (std::int64_t r = 0; r < rest_dim; ++r)
            acc += std::conj(rest[r]) * s.amps()[sel.rest_bases[r] + sel.sub_offsets[t]];
        sub[t] = acc;
    }

    double residual = 0.0;
    for (std::int64_t t = 0; t < sel.sub_dim; ++t)
        for (std::int64_t r = 0; r < rest_dim; ++r)
            residual += std::norm(s.amps()[sel.rest_bases[r] + sel.sub_offsets[t]] - sub[t] * rest[r]);
    if (residual > 1e-9)
        throw std::runtime_error("split_off: subsystems are entangled (residual " +
                                 std::to_string(residual) + ")");

    std::vector<int> sub_dims, rest_dims;
    std::vector<std::string> rest_labels;
    for (int ax : sel.target_axes) sub_dims.push_back(s.space().dim(ax));
    for (int ax = 0; ax < s.space().num_subsystems(); ++ax)
        if (std::find(sel.target_axes.begin(), sel.target_axes.end(), ax) == sel.target_axes.end()) {
            rest_dims.push_back(s.space().dim(ax));
            rest_labels.push_back(s.space().label(ax));
        }
    return {StateVector::normalized(CompositeSpace(sub_dims, labels), std::move(sub)),
            StateVector::normalized(CompositeSpace(rest_dims, rest_labels), std::move(rest))};
}

StateVector random_state(CompositeSpace space, SplitMix64& rng) {
    std::vector<Complex> amps(space.total_dim());
    for (Complex& a : amps) a = Complex(rng.gaussian(), rng.gaussian());
    return StateVector::normalized(std::move(space), std::move(amps));
}

std::string StateVector::to_json() const {
    nlohmann::json j;
    j["dims"] = space_.dims();
    j["labels"] = space_.labels();
    nlohmann::json amps = nlohmann::json::array();
    for (const Complex& a : amps_) amps.push_back({a.real(), a.imag()});
    j["amps"] = std::move(amps);
    return j.dump();
}

StateVector StateVector::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<int> dims = j.at("dims").get<std::vector<int>>();
    std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
    std::vector<Complex> amps;
    for (const auto& pair : j.at("amps"))
        amps.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    return StateVector(CompositeSpace(std::move(dims), std::move(labels)), std::move(amps));
}

} // namespace qtel
