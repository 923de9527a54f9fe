#include "episcale/errors.hpp"
#include "episcale/fixed_point.hpp"
#include "episcale/seirs.hpp"

#include <doctest.h>

#include <cmath>

using namespace episcale;

namespace {

VectorMap linear(const Matrix& a)
{
    return [a](const Vector& x) -> Vector { return a * x; };
}

Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

} // namespace

TEST_SUITE("fixed_point")
{
    TEST_CASE("identity map returns the seed")
    {
        const Vector seed = vec({1, 2, 3});
        const auto r = find_fixed_point([](const Vector& x) { return x; }, seed);
        CHECK(r.x == seed);
        CHECK(r.residual == 0);
        CHECK(r.method == FixedPointMethod::Iteration);
    }

    TEST_CASE("local step converges to the disease-free equilibrium")
    {
        const EpidemicParams p(Survival{0.9, 0.9, 0.8, 0.95}, Transitions{0.5, 0.25, 0.1}, StandardIncidence{0.5},
                               ConstantRecruitment{10});
        const VectorMap step = [&p](const Vector& v) {
            const LocalState y = seirs_step(p, {v(0), v(1), v(2), v(3)});
            return vec({y.S, y.E, y.I, y.R});
        };
        const auto r = find_fixed_point(step, vec({95, 1, 1, 1}));
        CHECK(r.residual < 1e-10);
        CHECK(r.x(0) == doctest::Approx(100).epsilon(1e-9));
        CHECK(std::abs(r.x(1)) + std::abs(r.x(2)) + std::abs(r.x(3)) < 1e-8);
    }

    TEST_CASE("damping rescues an oscillating iteration")
    {
        // x -> 3 - 2x has derivative -2 at its fixed point 1
        const VectorMap step = [](const Vector& x) -> Vector { return Vector::Constant(1, 3.0) - 2.0 * x; };
        const auto r = find_fixed_point(step, vec({0.2}));
        CHECK(r.residual < 1e-10);
        CHECK(r.x(0) == doctest::Approx(1).epsilon(1e-10));
        CHECK(r.method == FixedPointMethod::Iteration);
        CHECK(r.damping < 1);
    }

    TEST_CASE("Newton takes over at a repelling fixed point")
    {
        // x -> 3x - 2: derivative 3, every damping factor diverges
        const VectorMap step = [](const Vector& x) -> Vector { return 3.0 * x - Vector::Constant(1, 2.0); };
        const auto r = find_fixed_point(step, vec({0.5}));
        CHECK(r.method == FixedPointMethod::Newton);
        CHECK(r.residual < 1e-10);
        CHECK(r.x(0) == doctest::Approx(1).epsilon(1e-10));
    }

    TEST_CASE("no fixed point is reported")
    {
        const VectorMap shift = [](const Vector& x) -> Vector { return x + Vector::Ones(x.size()); };
        FixedPointOptions opt;
        opt.max_iter = 2000;
        CHECK_THROWS_AS(find_fixed_point(shift, vec({0, 0}), opt), NumericalError);
    }

    TEST_CASE("finite-difference Jacobian")
    {
        Matrix a(2, 2);
        a << 0.5, 0.1, -0.3, 0.2;
        const Matrix j = finite_difference_jacobian(linear(a), vec({1, 2}));
        CHECK((j - a).cwiseAbs().maxCoeff() < 1e-8);

        // never evaluated at negative arguments
        const VectorMap guarded = [](const Vector& x) -> Vector {
            REQUIRE((x.array() >= 0).all());
            return x.array().square().matrix();
        };
        const Matrix g = finite_difference_jacobian(guarded, vec({0, 3}));
        CHECK(std::abs(g(0, 0)) < 1e-5);
        CHECK(g(1, 1) == doctest::Approx(6).epsilon(1e-8));
    }

    TEST_CASE("hyperbolicity")
    {
        Matrix contract(2, 2);
        contract << 0.5, 0, 0, 0.2;
        const auto c = check_hyperbolicity(linear(contract), vec({1, 1}));
        CHECK(c.hyperbolic);
        CHECK(c.attracting);
        CHECK(c.spectral_radius == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(c.distance_to_unit_circle == doctest::Approx(0.5).epsilon(1e-8));

        Matrix saddle(2, 2);
        saddle << 2, 0, 0, 0.5;
        const auto s = check_hyperbolicity(linear(saddle), vec({1, 1}));
        CHECK(s.hyperbolic);
        CHECK_FALSE(s.attracting);

        Matrix rotation(2, 2);
        rotation << 0, -1, 1, 0;
        const auto r = check_hyperbolicity(linear(rotation), vec({1, 1}));
        CHECK_FALSE(r.hyperbolic);
        CHECK_FALSE(r.attracting);
        CHECK(r.eigenvalues.size() == 2);
    }
}
