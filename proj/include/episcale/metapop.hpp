#pragma once

// n-patch metapopulation with fast movement and slow local disease dynamics.
//
// The state is stored compartment-major, X = col(x_S, x_E, x_I, x_R), each
// block holding the n patch densities. One slow step first applies the
// movement matrices k times (the fast process F^(k)) and then the local
// SEIRS step in every patch (the slow map S):
//
//   X(t+1) = S(M^k X(t))
//
// Movement matrices are column-stochastic: entry (i, j) is the fraction of
// the individuals in patch j that move to patch i, so every column sums to 1.

#include "episcale/linalg.hpp"
#include "episcale/seirs.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace episcale {

enum class Compartment { S = 0, E = 1, I = 2, R = 3 };

inline constexpr std::array<Compartment, 4> kCompartments{Compartment::S, Compartment::E, Compartment::I,
                                                          Compartment::R};

std::string_view to_string(Compartment c);

inline constexpr std::size_t index_of(Compartment c) { return static_cast<std::size_t>(c); }

/// Totals per compartment, Y = U X.
struct GlobalState {
    double S = 0, E = 0, I = 0, R = 0;

    double total() const noexcept { return S + E + I + R; }
    double get(Compartment c) const noexcept;
    bool is_nonnegative() const noexcept { return S >= 0 && E >= 0 && I >= 0 && R >= 0; }
    bool operator==(const GlobalState&) const = default;
};

class MetapopState {
public:
    /// All-zero state over n >= 1 patches.
    explicit MetapopState(std::size_t patches);

    /// Throws ValidationError on mismatched block lengths, n = 0, or negative entries.
    MetapopState(const Vector& S, const Vector& E, const Vector& I, const Vector& R);

    /// From the stacked 4n vector. Validated like the block constructor.
    static MetapopState from_stacked(const Vector& stacked);

    static MetapopState from_local(const LocalState& x);

    std::size_t patches() const noexcept { return n_; }

    auto block(Compartment c) const { return data_.segment(static_cast<Eigen::Index>(index_of(c) * n_), n_); }
    auto block(Compartment c) { return data_.segment(static_cast<Eigen::Index>(index_of(c) * n_), n_); }

    LocalState patch(std::size_t j) const;
    void set_patch(std::size_t j, const LocalState& x);

    const Vector& stacked() const noexcept { return data_; }

    bool is_nonnegative() const { return (data_.array() >= 0.0).all(); }

    bool operator==(const MetapopState& other) const
    {
        return n_ == other.n_ && data_ == other.data_;
    }

private:
    std::size_t n_;
    Vector data_;
};

GlobalState aggregate(const MetapopState& x);

double infected_mass(const LocalState& x);
double infected_mass(const GlobalState& y);
double infected_mass(const MetapopState& x);

/// Four constant column-stochastic regular movement matrices and the
/// time-scale ratio k (movement episodes per disease step).
class MovementModel {
public:
    /// Validates shapes, nonnegativity, unit column sums (1e-12) and
    /// regularity of each matrix, and k >= 1.
    MovementModel(std::array<Matrix, 4> matrices, unsigned k);

    std::size_t patches() const noexcept { return static_cast<std::size_t>(matrices_[0].rows()); }
    unsigned k() const noexcept { return k_; }

    const Matrix& matrix(Compartment c) const noexcept { return matrices_[index_of(c)]; }

    /// Movement in effect at global state y. Matrices are constant, so y is
    /// ignored; density-dependent movement would hook in here.
    const Matrix& matrix_at(Compartment c, const GlobalState& y) const noexcept;

    MovementModel with_k(unsigned k) const;

    bool operator==(const MovementModel& other) const;

private:
    std::array<Matrix, 4> matrices_;
    unsigned k_;
};

/// Identity movement over one patch.
MovementModel single_patch_movement(unsigned k = 1);

/// Patch parameters plus movement, with M^k cached for the full step.
class MetapopModel {
public:
    MetapopModel(std::vector<EpidemicParams> patches, MovementModel movement);

    std::size_t patches() const noexcept { return params_.size(); }
    const std::vector<EpidemicParams>& params() const noexcept { return params_; }
    const EpidemicParams& patch(std::size_t j) const { return params_.at(j); }
    const MovementModel& movement() const noexcept { return movement_; }

    /// (M^C)^k
    const Matrix& fast_power(Compartment c) const noexcept { return powers_[index_of(c)]; }

    MetapopModel with_k(unsigned k) const;

private:
    std::vector<EpidemicParams> params_;
    MovementModel movement_;
    std::array<Matrix, 4> powers_;
};

MetapopState fast_step(const MovementModel& m, const MetapopState& x);

enum class FastIterateMethod {
    Auto,     ///< stepping for k <= 8, matrix powers above
    Stepping, ///< k successive fast steps
    Power,    ///< one product with M^k (binary exponentiation)
};

/// k applications of fast_step. Throws std::invalid_argument for k = 0.
MetapopState fast_iterate(const MovementModel& m, const MetapopState& x, unsigned k,
                          FastIterateMethod method = FastIterateMethod::Auto);

/// Local SEIRS step in every patch with that patch's parameters.
MetapopState slow_map(const MetapopModel& model, const MetapopState& x);

/// slow_map(fast_iterate(x, k)) with the cached movement powers.
MetapopState full_step(const MetapopModel& model, const MetapopState& x);

/// [x0, full_step(x0), ...], horizon + 1 states.
std::vector<MetapopState> simulate(const MetapopModel& model, const MetapopState& x0, std::size_t horizon);

struct DissipativityBound {
    double sigma_max = 0;        ///< max over patches and compartments of sigma_j^C
    double recruitment_sum = 0;  ///< sum over patches of the recruitment bounds
    double attractor_radius = 0; ///< recruitment_sum / (1 - sigma_max)

    /// max(N0, attractor_radius); every later total stays at or below it.
    double envelope(double N0) const noexcept { return N0 > attractor_radius ? N0 : attractor_radius; }
};

/// Throws UnsupportedError if some patch has unbounded recruitment.
DissipativityBound dissipativity_bound(std::span<const EpidemicParams> patches);
DissipativityBound dissipativity_bound(const MetapopModel& model);

} // namespace episcale
