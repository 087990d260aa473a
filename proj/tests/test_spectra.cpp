#include "helpers.hpp"

#include "kitaev/error.hpp"
#include "kitaev/spectra.hpp"

#include <doctest.h>

#include <bit>
#include <numbers>

using namespace kitaev;

namespace {

ModelSpec hermitian_chain(int N, double mu, double delta = 1.0) {
    ModelSpec s;
    s.N = N;
    s.mu = mu;
    s.delta = delta;
    return s;
}

SpectrumResult spectrum(const ModelSpec& s, Precision p = Precision::standard) {
    return eigendecompose(build_bdg_obc(s).H, p);
}

CMatrix random_matrix(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    CMatrix A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
    return A;
}

}  // namespace

TEST_CASE("eigendecompose returns sorted, normalized pairs") {
    const CMatrix A = random_matrix(30, 1);
    const auto r = eigendecompose(A);
    REQUIRE(r.size() == 30);
    for (Eigen::Index i = 1; i < r.size(); ++i) CHECK(r.eigenvalues(i - 1).real() <= r.eigenvalues(i).real());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        CHECK(r.vectors.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((A * r.vectors.col(i) - r.eigenvalues(i) * r.vectors.col(i)).norm() < 1e-10);
        CHECK(r.residuals(i) < 1e-8 * r.norm_inf);
    }
    const auto oracle = testing::to_vector(Eigen::ComplexEigenSolver<CMatrix>(A).eigenvalues());
    CHECK(testing::multiset_distance(testing::to_vector(r.eigenvalues), oracle) < 1e-10);
}

TEST_CASE("extended precision agrees on a well-conditioned matrix") {
    const CMatrix A = random_matrix(24, 2);
    const auto a = eigendecompose(A);
    const auto b = eigendecompose(A, Precision::extended);
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(b.residuals.maxCoeff() < 1e-13 * b.norm_inf);
}

TEST_CASE("extended precision resolves a perturbed Jordan block") {
    // Eigenvalues are the cube roots of 1e-30, all of modulus 1e-10. Double
    // rounding alone would move them by ~(1e-16)^(1/3).
    CMatrix J = CMatrix::Zero(3, 3);
    J(0, 1) = 1.0;
    J(1, 2) = 1.0;
    J(2, 0) = 1e-30;
    const auto a = eigendecompose(J, Precision::extended);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(a.eigenvalues(i)) == doctest::Approx(1e-10).epsilon(1e-6));
    CHECK(std::abs(a.eigenvalues.sum()) < 1e-20);
}

TEST_CASE("input guards") {
    CHECK_THROWS_AS(eigendecompose(CMatrix::Zero(3, 4)), DomainError);
    CMatrix bad = CMatrix::Identity(3, 3);
    bad(1, 2) = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(eigendecompose(bad), DomainError);
    CHECK_THROWS_AS(mode_diagnostics(eigendecompose(CMatrix::Identity(4, 4)), 3), DomainError);
}

TEST_CASE("site weights and populations are normalized") {
    const auto r = spectrum(hermitian_chain(15, 0.8, 0.6));
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        CHECK(site_weights(r.vectors.col(i), 15).sum() == doctest::Approx(1.0));
        const auto p = population_distribution(r, i, 15);
        CHECK(p.particle.sum() + p.hole.sum() == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(population_distribution(r, 30, 15), DomainError);
}

TEST_CASE("Hermitian topological chain hosts one flagged edge pair") {
    for (double mu : {0.0, 0.5, 1.0}) {
        const auto r = spectrum(hermitian_chain(40, mu));
        const auto edges = detect_edge_states(r, 40);
        CAPTURE(mu);
        REQUIRE(edges.size() == 2);
        for (const auto& m : edges) {
            CHECK(std::abs(m.energy) < 1e-8);
            CHECK(m.edge_weight > 0.9);
        }
    }
    CHECK(detect_edge_states(spectrum(hermitian_chain(40, 3.0)), 40).empty());
}

TEST_CASE("edge splitting equals the many-body parity gap") {
    const ModelSpec s = hermitian_chain(8, 1.4, 0.7);
    const auto r = spectrum(s);
    const auto modes = mode_diagnostics(r, s.N);
    const double split = std::abs(r.eigenvalues(smallest_edge_mode(modes)));

    const CMatrix F = build_fock_hamiltonian(s).H;
    double best[2] = {1e300, 1e300};
    for (int parity = 0; parity < 2; ++parity) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index b = 0; b < F.rows(); ++b)
            if (std::popcount(static_cast<unsigned>(b)) % 2 == parity) idx.push_back(b);
        CMatrix block(idx.size(), idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) block(i, j) = F(idx[i], idx[j]);
        best[parity] = Eigen::SelfAdjointEigenSolver<CMatrix>(block).eigenvalues().minCoeff();
    }
    CHECK(split > 1e-4);
    CHECK(split == doctest::Approx(std::abs(best[0] - best[1])).epsilon(1e-9));
}

TEST_CASE("smallest edge mode falls back to the closest mode") {
    std::vector<ModeInfo> modes(3);
    modes[0] = {0, cplx(0.3, 0.0), false, 0.1, 0.1};
    modes[1] = {1, cplx(-0.1, 0.0), false, 0.1, 0.1};
    modes[2] = {2, cplx(0.5, 0.0), false, 0.1, 0.1};
    CHECK(smallest_edge_mode(modes) == 1);
    modes[2].edge_flag = true;
    CHECK(smallest_edge_mode(modes) == 2);
}

TEST_CASE("lowest upper-band state") {
    SUBCASE("nondegenerate band edge is an eigenvector") {
        const ModelSpec s = hermitian_chain(20, 0.5, 0.8);
        const auto r = spectrum(s);
        const auto b = lowest_upper_band_state(r, s.N);
        const auto ev = testing::to_vector(Eigen::ComplexEigenSolver<CMatrix>(build_bdg_obc(s).H).eigenvalues());
        double expect = 1e300;
        for (cplx e : ev)
            if (e.real() > 0.05) expect = std::min(expect, e.real());
        CHECK(b.energy.real() == doctest::Approx(expect).epsilon(1e-10));
        const CMatrix H = build_bdg_obc(s).H;
        CHECK((H * b.vector - b.energy * b.vector).norm() < 1e-8);
    }
    SUBCASE("flat band resolves into the leftmost bond state") {
        const ModelSpec s = hermitian_chain(16, 0.0, 1.0);
        const auto r = spectrum(s);
        const auto b = lowest_upper_band_state(r, s.N);
        CHECK(b.energy.real() == doctest::Approx(2.0));
        CHECK(b.cluster.size() == 15);
        const auto p = population_distribution(b.vector, s.N);
        CHECK(p.particle(0) + p.particle(1) + p.hole(0) + p.hole(1) > 0.999);
    }
}

TEST_CASE("strict extrema") {
    const std::vector<double> zigzag{1, 2, 1, 2, 1};
    CHECK(count_strict_extrema(zigzag) == 3);
    const std::vector<double> rising{1, 2, 3, 4};
    CHECK(count_strict_extrema(rising) == 0);
    const std::vector<double> below_floor{1e-12, 1e-15, 1e-13, 1e-16};
    CHECK(count_strict_extrema(below_floor) == 0);
    const std::vector<double> plateau{1, 2, 2, 1};
    CHECK(count_strict_extrema(plateau) == 0);
    const std::vector<double> shorty{1, 2};
    CHECK_THROWS_AS(count_strict_extrema(shorty), DomainError);
}

TEST_CASE("sweep keeps order, isolates failures and ignores worker count") {
    ModelSpec base = hermitian_chain(10, 0.0);
    base.gamma = 0.2;
    const std::vector<double> values{0.0, 0.5, -1.0, 1.5, 2.5};
    SweepOptions one, many;
    many.workers = 4;
    const auto a = spectral_sweep(base, SweepAxis::gamma, values, one);
    const auto b = spectral_sweep(base, SweepAxis::gamma, values, many);
    REQUIRE(a.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(a[i].value == values[i]);
        CHECK(a[i].failed == (values[i] < 0.0));
        CHECK(a[i].failed == b[i].failed);
        if (!a[i].failed) {
            CHECK(a[i].energies.size() == 20);
            CHECK(a[i].energies == b[i].energies);
            CHECK(a[i].min_abs == doctest::Approx(a[i].energies.cwiseAbs().minCoeff()));
        }
    }
    CHECK(!a[2].error.empty());
}

TEST_CASE("sweep axes") {
    CHECK(parse_sweep_axis("onsite_delta") == SweepAxis::onsite_delta);
    CHECK(to_string(SweepAxis::theta) == "theta");
    CHECK_THROWS_AS(parse_sweep_axis("beta"), ConfigError);
    CHECK(with_axis_value({}, SweepAxis::mu, 0.7).mu == 0.7);
}

TEST_CASE("trivial phase: dissipation barely moves the real parts") {
    auto sorted_re = [](double gamma) {
        ModelSpec s;
        s.mu = 4.0;
        s.gamma = gamma;
        std::vector<double> v;
        for (const cplx& z : eigendecompose(build_bdg_obc(s).H).eigenvalues) v.push_back(z.real());
        std::ranges::sort(v);
        return v;
    };
    const auto base = sorted_re(0.0);
    const double scale = std::ranges::max(base, {}, [](double x) { return std::abs(x); });
    double worst = 0.0;
    for (int i = 1; i <= 40; ++i) {
        const auto r = sorted_re(0.1 * i);
        for (std::size_t k = 0; k < r.size(); ++k) worst = std::max(worst, std::abs(r[k] - base[k]));
    }
    // about 4.7% of the band edge over gamma in [0, 4t]
    CHECK(worst / std::abs(scale) == doctest::Approx(0.0466).epsilon(0.01));
    CHECK(worst / std::abs(scale) < 0.05);
}
