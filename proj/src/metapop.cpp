#include "episcale/metapop.hpp"

#include "episcale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace episcale {

std::string_view to_string(Compartment c)
{
    switch (c) {
    case Compartment::S: return "S";
    case Compartment::E: return "E";
    case Compartment::I: return "I";
    case Compartment::R: return "R";
    }
    return "?";
}

double GlobalState::get(Compartment c) const noexcept
{
    switch (c) {
    case Compartment::S: return S;
    case Compartment::E: return E;
    case Compartment::I: return I;
    case Compartment::R: return R;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

MetapopState::MetapopState(std::size_t patches) : n_(patches), data_(Vector::Zero(4 * static_cast<Eigen::Index>(patches)))
{
    if (patches == 0) {
        throw ValidationError("state", "a metapopulation needs at least one patch");
    }
}

MetapopState::MetapopState(const Vector& S, const Vector& E, const Vector& I, const Vector& R)
    : MetapopState(static_cast<std::size_t>(S.size()))
{
    if (E.size() != S.size() || I.size() != S.size() || R.size() != S.size()) {
        throw ValidationError("state", "compartment blocks must have the same length");
    }
    block(Compartment::S) = S;
    block(Compartment::E) = E;
    block(Compartment::I) = I;
    block(Compartment::R) = R;
    if (!is_nonnegative() || !data_.allFinite()) {
        throw ValidationError("state", "densities must be finite and nonnegative");
    }
}

MetapopState MetapopState::from_stacked(const Vector& stacked)
{
    if (stacked.size() == 0 || stacked.size() % 4 != 0) {
        throw ValidationError("state", "stacked state length must be a positive multiple of 4");
    }
    const auto n = stacked.size() / 4;
    return MetapopState(stacked.segment(0, n), stacked.segment(n, n), stacked.segment(2 * n, n),
                        stacked.segment(3 * n, n));
}

MetapopState MetapopState::from_local(const LocalState& x)
{
    MetapopState state(1);
    state.set_patch(0, x);
    if (!state.is_nonnegative()) {
        throw ValidationError("state", "densities must be nonnegative");
    }
    return state;
}

LocalState MetapopState::patch(std::size_t j) const
{
    if (j >= n_) {
        throw std::out_of_range("patch index out of range");
    }
    const auto i = static_cast<Eigen::Index>(j);
    const auto n = static_cast<Eigen::Index>(n_);
    return {data_[i], data_[n + i], data_[2 * n + i], data_[3 * n + i]};
}

void MetapopState::set_patch(std::size_t j, const LocalState& x)
{
    if (j >= n_) {
        throw std::out_of_range("patch index out of range");
    }
    const auto i = static_cast<Eigen::Index>(j);
    const auto n = static_cast<Eigen::Index>(n_);
    data_[i] = x.S;
    data_[n + i] = x.E;
    data_[2 * n + i] = x.I;
    data_[3 * n + i] = x.R;
}

GlobalState aggregate(const MetapopState& x)
{
    return {x.block(Compartment::S).sum(), x.block(Compartment::E).sum(), x.block(Compartment::I).sum(),
            x.block(Compartment::R).sum()};
}

double infected_mass(const LocalState& x) { return x.E + x.I; }
double infected_mass(const GlobalState& y) { return y.E + y.I; }
double infected_mass(const MetapopState& x)
{
    return x.block(Compartment::E).sum() + x.block(Compartment::I).sum();
}

// ---------------------------------------------------------------------------

MovementModel::MovementModel(std::array<Matrix, 4> matrices, unsigned k) : matrices_(std::move(matrices)), k_(k)
{
    if (k_ == 0) {
        throw ValidationError("movement.k", "time-scale ratio k must be a positive integer");
    }
    const auto n = matrices_[0].rows();
    if (n == 0) {
        throw ValidationError("movement", "matrices must have at least one row");
    }
    for (Compartment c : kCompartments) {
        const Matrix& m = matrices_[index_of(c)];
        const std::string field = "movement." + std::string(to_string(c));
        if (m.rows() != n || m.cols() != n) {
            throw ValidationError(field, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
        }
        if (!m.allFinite() || (m.array() < 0.0).any()) {
            throw ValidationError(field, "entries must be finite and nonnegative");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double sum = m.col(j).sum();
            if (std::abs(sum - 1.0) > 1e-12) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.12g", sum);
                throw ValidationError(field, "column " + std::to_string(j) + " sums to " + buf +
                                                 " (expected 1 within 1e-12)");
            }
        }
        if (!is_regular(m)) {
            throw ValidationError(field, "matrix is not regular (no positive power up to the Wielandt bound)");
        }
    }
}

const Matrix& MovementModel::matrix_at(Compartment c, const GlobalState&) const noexcept
{
    return matrix(c);
}

MovementModel MovementModel::with_k(unsigned k) const
{
    return MovementModel(matrices_, k);
}

bool MovementModel::operator==(const MovementModel& other) const
{
    if (k_ != other.k_ || patches() != other.patches()) {
        return false;
    }
    for (std::size_t c = 0; c < 4; ++c) {
        if (matrices_[c] != other.matrices_[c]) {
            return false;
        }
    }
    return true;
}

MovementModel single_patch_movement(unsigned k)
{
    const Matrix one = Matrix::Ones(1, 1);
    return MovementModel({one, one, one, one}, k);
}

// ---------------------------------------------------------------------------

namespace {

Matrix cached_power(const Matrix& m, unsigned k)
{
    if (k <= 8) {
        Matrix p = m;
        for (unsigned i = 1; i < k; ++i) {
            p = m * p;
        }
        return p;
    }
    return matrix_power(m, k);
}

} // namespace

MetapopModel::MetapopModel(std::vector<EpidemicParams> patches, MovementModel movement)
    : params_(std::move(patches)), movement_(std::move(movement))
{
    if (params_.size() != movement_.patches()) {
        throw ValidationError("patches", "patch count " + std::to_string(params_.size()) +
                                             " does not match movement dimension " +
                                             std::to_string(movement_.patches()));
    }
    for (Compartment c : kCompartments) {
        powers_[index_of(c)] = cached_power(movement_.matrix(c), movement_.k());
    }
}

MetapopModel MetapopModel::with_k(unsigned k) const
{
    return MetapopModel(params_, movement_.with_k(k));
}

// ---------------------------------------------------------------------------

namespace {

void require_dimension(std::size_t expected, const MetapopState& x)
{
    if (x.patches() != expected) {
        throw ValidationError("state", "state has " + std::to_string(x.patches()) + " patches, model has " +
                                           std::to_string(expected));
    }
}

MetapopState apply_blocks(const std::array<const Matrix*, 4>& ms, const MetapopState& x)
{
    MetapopState out(x.patches());
    for (Compartment c : kCompartments) {
        out.block(c).noalias() = *ms[index_of(c)] * x.block(c);
    }
    return out;
}

} // namespace

MetapopState fast_step(const MovementModel& m, const MetapopState& x)
{
    require_dimension(m.patches(), x);
    const GlobalState y = aggregate(x);
    return apply_blocks({&m.matrix_at(Compartment::S, y), &m.matrix_at(Compartment::E, y),
                         &m.matrix_at(Compartment::I, y), &m.matrix_at(Compartment::R, y)},
                        x);
}

MetapopState fast_iterate(const MovementModel& m, const MetapopState& x, unsigned k, FastIterateMethod method)
{
    if (k == 0) {
        throw std::invalid_argument("fast_iterate: k must be at least 1");
    }
    require_dimension(m.patches(), x);
    if (method == FastIterateMethod::Auto) {
        method = k > 8 ? FastIterateMethod::Power : FastIterateMethod::Stepping;
    }
    if (method == FastIterateMethod::Stepping) {
        MetapopState out = x;
        for (unsigned i = 0; i < k; ++i) {
            out = fast_step(m, out);
        }
        return out;
    }
    std::array<Matrix, 4> powers;
    for (Compartment c : kCompartments) {
        powers[index_of(c)] = matrix_power(m.matrix(c), k);
    }
    return apply_blocks({&powers[0], &powers[1], &powers[2], &powers[3]}, x);
}

MetapopState slow_map(const MetapopModel& model, const MetapopState& x)
{
    require_dimension(model.patches(), x);
    MetapopState out(x.patches());
    for (std::size_t j = 0; j < x.patches(); ++j) {
        out.set_patch(j, seirs_step(model.patch(j), x.patch(j)));
    }
    return out;
}

MetapopState full_step(const MetapopModel& model, const MetapopState& x)
{
    require_dimension(model.patches(), x);
    const MetapopState moved = apply_blocks({&model.fast_power(Compartment::S), &model.fast_power(Compartment::E),
                                             &model.fast_power(Compartment::I), &model.fast_power(Compartment::R)},
                                            x);
    return slow_map(model, moved);
}

std::vector<MetapopState> simulate(const MetapopModel& model, const MetapopState& x0, std::size_t horizon)
{
    require_dimension(model.patches(), x0);
    std::vector<MetapopState> orbit;
    orbit.reserve(horizon + 1);
    orbit.push_back(x0);
    for (std::size_t t = 0; t < horizon; ++t) {
        orbit.push_back(full_step(model, orbit.back()));
    }
    return orbit;
}

DissipativityBound dissipativity_bound(std::span<const EpidemicParams> patches)
{
    DissipativityBound out;
    for (std::size_t j = 0; j < patches.size(); ++j) {
        const auto& p = patches[j];
        const auto bound = recruitment_bound(p.recruitment());
        if (!bound) {
            throw UnsupportedError("dissipativity bound needs bounded recruitment; patch " + std::to_string(j) +
                                   " uses geometric recruitment");
        }
        out.recruitment_sum += *bound;
        const auto& s = p.sigma();
        out.sigma_max = std::max({out.sigma_max, s.S, s.E, s.I, s.R});
    }
    out.attractor_radius = out.recruitment_sum / (1.0 - out.sigma_max);
    return out;
}

DissipativityBound dissipativity_bound(const MetapopModel& model)
{
    return dissipativity_bound(std::span<const EpidemicParams>(model.params()));
}

} // namespace episcale
