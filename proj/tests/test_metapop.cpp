#include "episcale/errors.hpp"
#include "episcale/metapop.hpp"

#include "flagship.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace episcale;

namespace {

std::array<Matrix, 4> same4(const Matrix& m) { return {m, m, m, m}; }

Matrix two_by_two(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

MetapopState s_block(double s1, double s2)
{
    Vector S(2), Z = Vector::Zero(2);
    S << s1, s2;
    return MetapopState(S, Z, Z, Z);
}

MetapopModel random_model(std::mt19937_64& rng, int n, unsigned k, bool sparse)
{
    std::vector<EpidemicParams> patches;
    for (int j = 0; j < n; ++j) {
        patches.push_back(oracle::to_library(oracle::random_params(rng)));
    }
    std::array<Matrix, 4> ms;
    for (auto& m : ms) {
        m = sparse ? oracle::random_sparse_stochastic(rng, n) : oracle::random_positive_stochastic(rng, n);
    }
    return MetapopModel(std::move(patches), MovementModel(ms, k));
}

} // namespace

TEST_SUITE("metapop")
{
    TEST_CASE("state layout and aggregation")
    {
        Vector S(2), E(2), I(2), R(2);
        S << 1, 2;
        E << 3, 4;
        I << 5, 6;
        R << 7, 8;
        const MetapopState x(S, E, I, R);
        CHECK(x.stacked()(0) == 1);
        CHECK(x.stacked()(2) == 3);
        CHECK(x.stacked()(7) == 8);
        CHECK(x.patch(1) == LocalState{2, 4, 6, 8});
        CHECK(aggregate(x) == GlobalState{3, 7, 11, 15});
        CHECK(MetapopState::from_stacked(x.stacked()) == x);

        CHECK_THROWS_AS(MetapopState(S, E, I, Vector::Zero(3)), ValidationError);
        Vector neg = S;
        neg(0) = -1;
        CHECK_THROWS_AS(MetapopState(neg, E, I, R), ValidationError);
        CHECK_THROWS_AS(MetapopState::from_stacked(Vector::Zero(6)), ValidationError);
    }

    TEST_CASE("fast step examples")
    {
        const MovementModel mv(same4(two_by_two(0.9, 0.2, 0.1, 0.8)), 1);
        const MetapopState x = s_block(10, 20);
        const MetapopState one = fast_step(mv, x);
        CHECK(one.block(Compartment::S)(0) == doctest::Approx(13).epsilon(1e-15));
        CHECK(one.block(Compartment::S)(1) == doctest::Approx(17).epsilon(1e-15));

        const MetapopState two = fast_iterate(mv, x, 2);
        CHECK(two.block(Compartment::S)(0) == doctest::Approx(15.1).epsilon(1e-14));
        CHECK(two.block(Compartment::S)(1) == doctest::Approx(14.9).epsilon(1e-14));

        // stationary vector (2/3, 1/3) times the total 30
        for (auto method : {FastIterateMethod::Auto, FastIterateMethod::Stepping, FastIterateMethod::Power}) {
            const MetapopState many = fast_iterate(mv, x, 200, method);
            CHECK(std::abs(many.block(Compartment::S)(0) - 20) < 1e-8);
            CHECK(std::abs(many.block(Compartment::S)(1) - 10) < 1e-8);
        }

        CHECK_THROWS_AS(fast_iterate(mv, x, 0), std::invalid_argument);
    }

    TEST_CASE("movement conserves every compartment total")
    {
        std::mt19937_64 rng(7);
        for (int rep = 0; rep < 100; ++rep) {
            const int n = 2 + rep % 9;
            std::array<Matrix, 4> ms;
            for (auto& m : ms) {
                m = rep % 2 ? oracle::random_sparse_stochastic(rng, n) : oracle::random_positive_stochastic(rng, n);
            }
            const MovementModel mv(ms, 1);
            const MetapopState x = oracle::random_state(rng, static_cast<std::size_t>(n));
            const GlobalState before = aggregate(x);
            MetapopState y = x;
            for (int i = 0; i < 25; ++i) {
                y = fast_step(mv, y);
                const GlobalState after = aggregate(y);
                for (auto c : kCompartments) {
                    CHECK(std::abs(after.get(c) - before.get(c)) <= 1e-12 * (1 + before.get(c)));
                }
                CHECK(y.is_nonnegative());
            }
        }
    }

    TEST_CASE("stepping and matrix powers agree")
    {
        std::mt19937_64 rng(11);
        for (int rep = 0; rep < 20; ++rep) {
            const int n = 2 + rep % 6;
            std::array<Matrix, 4> ms;
            for (auto& m : ms) {
                m = oracle::random_sparse_stochastic(rng, n);
            }
            const MovementModel mv(ms, 1);
            const MetapopState x = oracle::random_state(rng, static_cast<std::size_t>(n));
            for (unsigned k : {1u, 2u, 3u, 7u, 8u, 9u, 16u, 33u, 64u}) {
                const Vector a = fast_iterate(mv, x, k, FastIterateMethod::Stepping).stacked();
                const Vector b = fast_iterate(mv, x, k, FastIterateMethod::Power).stacked();
                CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
            }
        }
    }

    TEST_CASE("movement validation")
    {
        const Matrix good = two_by_two(0.9, 0.2, 0.1, 0.8);
        std::array<Matrix, 4> ms = same4(good);
        ms[1] = two_by_two(0.9, 0.2, 0.09, 0.8);
        try {
            MovementModel(ms, 1);
            FAIL("column sum 0.99 accepted");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "movement.E");
            const std::string what = e.what();
            CHECK(what.find("column 0") != std::string::npos);
            CHECK(what.find("0.99") != std::string::npos);
        }

        ms = same4(good);
        ms[2] = two_by_two(0, 1, 1, 0);
        try {
            MovementModel(ms, 1);
            FAIL("periodic matrix accepted");
        } catch (const ValidationError& e) {
            CHECK(e.field() == "movement.I");
        }

        ms = same4(good);
        ms[3] = two_by_two(1.1, 0.2, -0.1, 0.8);
        CHECK_THROWS_AS(MovementModel(ms, 1), ValidationError);

        ms = same4(good);
        ms[0] = Matrix::Identity(3, 3);
        CHECK_THROWS_AS(MovementModel(ms, 1), ValidationError);

        CHECK_THROWS_AS(MovementModel(same4(good), 0), ValidationError);
        CHECK_NOTHROW(MovementModel(same4(Matrix::Ones(1, 1)), 1));
    }

    TEST_CASE("slow map acts patchwise")
    {
        std::mt19937_64 rng(13);
        for (int rep = 0; rep < 50; ++rep) {
            const int n = 1 + rep % 5;
            std::vector<oracle::Params> ps;
            std::vector<EpidemicParams> lib;
            for (int j = 0; j < n; ++j) {
                ps.push_back(oracle::random_params(rng));
                lib.push_back(oracle::to_library(ps.back()));
            }
            std::array<Matrix, 4> ms;
            for (auto& m : ms) {
                m = oracle::random_positive_stochastic(rng, n);
            }
            const MetapopModel model(lib, MovementModel(ms, 3));
            const MetapopState x = oracle::random_state(rng, static_cast<std::size_t>(n));
            const MetapopState y = slow_map(model, x);
            for (int j = 0; j < n; ++j) {
                const LocalState xj = x.patch(static_cast<std::size_t>(j));
                const auto expect = oracle::seirs_step(ps[static_cast<std::size_t>(j)], {xj.S, xj.E, xj.I, xj.R});
                const LocalState yj = y.patch(static_cast<std::size_t>(j));
                CHECK(yj.S == doctest::Approx(expect[0]).epsilon(1e-14));
                CHECK(yj.E == doctest::Approx(expect[1]).epsilon(1e-14));
                CHECK(yj.I == doctest::Approx(expect[2]).epsilon(1e-14));
                CHECK(yj.R == doctest::Approx(expect[3]).epsilon(1e-14));
            }
        }
    }

    TEST_CASE("full step is the slow map after k fast steps")
    {
        std::mt19937_64 rng(17);
        for (int rep = 0; rep < 30; ++rep) {
            const int n = 2 + rep % 4;
            const unsigned k = 1 + static_cast<unsigned>(rep % 12);
            const MetapopModel model = random_model(rng, n, k, rep % 2 == 0);
            const MetapopState x = oracle::random_state(rng, static_cast<std::size_t>(n));
            MetapopState moved = x;
            for (unsigned i = 0; i < k; ++i) {
                moved = fast_step(model.movement(), moved);
            }
            const Vector expect = slow_map(model, moved).stacked();
            const Vector got = full_step(model, x).stacked();
            CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-10 * (1 + expect.cwiseAbs().maxCoeff()));
        }
    }

    TEST_CASE("one patch reproduces the local orbit exactly")
    {
        std::mt19937_64 rng(19);
        for (int rep = 0; rep < 20; ++rep) {
            const EpidemicParams p = oracle::to_library(oracle::random_params(rng));
            const MetapopModel model({p}, single_patch_movement(1 + static_cast<unsigned>(rep)));
            LocalState local{80, 5, 10, 5};
            MetapopState x = MetapopState::from_local(local);
            for (int t = 0; t < 200; ++t) {
                local = seirs_step(p, local);
                x = full_step(model, x);
                CHECK(x.patch(0) == local);
            }
        }
    }

    TEST_CASE("simulate")
    {
        const MetapopModel model = fixture::flagship_model();
        const auto x0 = fixture::flagship_start();
        const auto orbit = simulate(model, x0, 3);
        REQUIRE(orbit.size() == 4);
        CHECK(orbit[0] == x0);
        CHECK(orbit[2] == full_step(model, orbit[1]));
        CHECK(simulate(model, x0, 0).size() == 1);
    }

    TEST_CASE("dissipativity bound examples")
    {
        const auto patch = [](double sigma, double B) {
            return EpidemicParams(Survival{sigma, sigma, sigma, sigma}, Transitions{0.5, 0.5, 0.5},
                                  StandardIncidence{0.5}, ConstantRecruitment{B});
        };
        std::vector<EpidemicParams> one{patch(0.9, 10)};
        const auto b1 = dissipativity_bound(one);
        CHECK(b1.sigma_max == 0.9);
        CHECK(b1.recruitment_sum == 10);
        CHECK(b1.attractor_radius == doctest::Approx(100).epsilon(1e-14));

        std::vector<EpidemicParams> two{patch(0.9, 10), patch(0.95, 5)};
        const auto b2 = dissipativity_bound(two);
        CHECK(b2.sigma_max == 0.95);
        CHECK(b2.recruitment_sum == 15);
        CHECK(b2.attractor_radius == doctest::Approx(300).epsilon(1e-13));
        CHECK(b2.envelope(500) == 500);
        CHECK(b2.envelope(10) == doctest::Approx(300).epsilon(1e-13));

        std::vector<EpidemicParams> geo{
            EpidemicParams(Survival{0.9, 0.9, 0.9, 0.9}, Transitions{0.5, 0.5, 0.5}, StandardIncidence{0.5},
                           GeometricRecruitment{0.05})};
        CHECK_THROWS_AS(dissipativity_bound(geo), UnsupportedError);
    }

    TEST_CASE("totals stay under the dissipativity envelope")
    {
        std::mt19937_64 rng(23);
        for (int rep = 0; rep < 40; ++rep) {
            const int n = 1 + rep % 6;
            const unsigned k = 1 + static_cast<unsigned>(rep % 10);
            const MetapopModel model = random_model(rng, n, k, rep % 3 == 0);
            const auto bound = dissipativity_bound(model);
            MetapopState x = oracle::random_state(rng, static_cast<std::size_t>(n), 500);
            const double N0 = aggregate(x).total();
            double N = N0;
            for (int t = 0; t < 1000; ++t) {
                x = full_step(model, x);
                const double next = aggregate(x).total();
                CHECK(next <= bound.sigma_max * N + bound.recruitment_sum + 1e-9 * (1 + N));
                CHECK(next <= bound.envelope(N0) * (1 + 1e-12));
                CHECK(x.is_nonnegative());
                N = next;
            }
        }
    }

    TEST_CASE("the flagship orbit clears infection")
    {
        const MetapopModel model = fixture::flagship_model();
        auto x = fixture::flagship_start();
        for (int t = 0; t < 5000; ++t) {
            x = full_step(model, x);
        }
        CHECK(infected_mass(x) < 1e-6);
    }

    TEST_CASE("with_k rebuilds the cached powers")
    {
        const MetapopModel model = fixture::flagship_model(4);
        const MetapopModel other = model.with_k(9);
        CHECK(other.movement().k() == 9);
        const Matrix expect = matrix_power(model.movement().matrix(Compartment::I), 9);
        CHECK((other.fast_power(Compartment::I) - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
}
