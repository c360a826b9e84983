#include <doctest.h>

#include <cmath>

#include "naqs/analysis.hpp"
#include "naqs/oracle.hpp"

using namespace naqs;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("chebyshev closed form for -x ln x") {
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::NegXLogX, 7);
    CHECK(approx.chebyshev[0] == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-15));
    CHECK(approx.chebyshev[1] == doctest::Approx(std::log(2.0) - 0.75).epsilon(1e-15));
    CHECK(approx.chebyshev[2] == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    CHECK(approx.chebyshev[3] == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
    CHECK(approx.bound == doctest::Approx(1.0 / 112.0).epsilon(1e-15));
}

TEST_CASE("closed-form coefficients match numerical chebyshev quadrature") {
    // Gauss-Chebyshev quadrature of the series integral with enough nodes
    // that aliasing is negligible
    const int nodes = 200000;
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::NegXLogX, 12);
    for (int k = 0; k <= 12; ++k) {
        double sum = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const double theta = (2.0 * j + 1.0) * kPi / (2.0 * nodes);
            const double x = 0.5 * (std::cos(theta) + 1.0);
            const double f = x > 0.0 ? -x * std::log(x) : 0.0;
            sum += f * std::cos(k * theta);
        }
        const double a_k = (k == 0 ? 1.0 : 2.0) * sum / nodes;
        CHECK(approx.chebyshev[static_cast<std::size_t>(k)] == doctest::Approx(a_k).epsilon(1e-10));
    }
}

TEST_CASE("uniform error bound holds empirically") {
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::NegXLogX, 7);
    double worst = 0.0;
    const int samples = 100000;
    for (int i = 1; i <= samples; ++i) {
        const double x = static_cast<double>(i) / samples;
        worst = std::max(worst, std::abs(-x * std::log(x) - approx.eval_chebyshev(x)));
    }
    CHECK(worst <= approx.bound + 1e-12);
}

TEST_CASE("monomial conversion") {
    const ChebyshevApprox one = chebyshev_coefficients(BpaTarget::NegXLogX, 1);
    CHECK(one.monomial[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(one.monomial[1] == doctest::Approx(2.0 * std::log(2.0) - 1.5).epsilon(1e-14));

    const ChebyshevApprox seven = chebyshev_coefficients(BpaTarget::NegXLogX, 7);
    CHECK(std::abs(seven.monomial[7]) ==
          doctest::Approx(std::pow(2.0, 13) / (7.0 * 48.0)).epsilon(1e-12));

    // both representations evaluate to the same polynomial
    for (int i = 0; i <= 1000; ++i) {
        const double x = static_cast<double>(i) / 1000.0;
        CHECK(seven.eval_monomial(x) == doctest::Approx(seven.eval_chebyshev(x)).epsilon(1e-10));
    }
}

TEST_CASE("power target reproduces x^2 exactly in the q -> 2 limit") {
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::Power, 4, 1.9999999999);
    for (int i = 0; i <= 1000; ++i) {
        const double x = static_cast<double>(i) / 1000.0;
        CHECK(std::abs(approx.eval_chebyshev(x) - x * x) < 1e-8);
    }
    const ChebyshevApprox mid = chebyshev_coefficients(BpaTarget::Power, 9, 1.5);
    for (int i = 0; i <= 1000; ++i) {
        const double x = static_cast<double>(i) / 1000.0;
        CHECK(std::abs(mid.eval_chebyshev(x) - std::pow(x, 1.5)) < 2e-3);
    }
    CHECK_THROWS_AS(chebyshev_coefficients(BpaTarget::Power, 5, 2.5), std::invalid_argument);
}

TEST_CASE("bpa on exact spectra stays within the rank bound") {
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::NegXLogX, 7);

    auto run = [&](const std::vector<double>& spectrum) {
        std::map<int, TraceValue> traces;
        for (int m = 1; m <= approx.cutoff; ++m) {
            double t = 0.0;
            for (double lam : spectrum) t += std::pow(lam, m);
            traces[m] = TraceValue{t, 0.0};
        }
        double exact = 0.0;
        for (double lam : spectrum)
            if (lam > 0.0) exact -= lam * std::log(lam);
        const int rank = static_cast<int>(spectrum.size());
        // with the rank the bound is rank * beta; without it the constant
        // shift costs at most another beta per eigenvalue
        const BpaResult with_rank = bpa_entropy(traces, approx, rank);
        CHECK(with_rank.rank_corrected);
        CHECK(std::abs(with_rank.value - exact) <= rank * approx.bound);
        const BpaResult rank_free = bpa_entropy(traces, approx);
        CHECK(std::abs(rank_free.value - exact) <= 2.0 * rank * approx.bound);
    };

    run({1.0});                 // pure state: S1 ~ 0 within the bound
    run({0.5, 0.5});            // GHZ
    run({0.9, 0.1});
    run({0.6, 0.3, 0.08, 0.02});

    // oracle spectrum from the 8-site AFH chain
    const Lattice chain = Lattice::chain_open(8);
    const SiteOrdering ord = build_ordering(OrderingKind::Linear, chain);
    const GroundStateResult gs = exact_ground_state(Hamiltonian(chain, ord));
    for (int cut : {2, 3, 4}) {
        const ReducedSpectrum spec = reduced_spectrum(gs.state, prefix_bipartition(ord, chain, cut));
        std::map<int, TraceValue> traces;
        for (int m = 1; m <= 7; ++m) traces[m] = TraceValue{spec.trace_power(m), 0.0};
        const BpaResult r = bpa_entropy(traces, approx, spec.rank);
        CHECK(std::abs(r.value - exact_vn(spec)) <= spec.rank * approx.bound);
    }
}

TEST_CASE("bpa propagates statistical errors and flags unreliable results") {
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::NegXLogX, 7);
    std::map<int, TraceValue> traces;
    for (int m = 1; m <= 7; ++m) traces[m] = TraceValue{std::pow(2.0, 1.0 - m), 1e-3};
    const BpaResult r = bpa_entropy(traces, approx);
    double expected_err = 0.0;
    for (int m = 1; m <= 7; ++m) expected_err += std::abs(approx.monomial[static_cast<std::size_t>(m)]) * 1e-3;
    CHECK(r.statistical_error == doctest::Approx(expected_err).epsilon(1e-12));
    CHECK_FALSE(r.unreliable);

    // blowing up the noise must trip the flag
    for (int m = 1; m <= 7; ++m) traces[m].stderr_val = 0.5;
    CHECK(bpa_entropy(traces, approx).unreliable);

    std::map<int, TraceValue> incomplete;
    incomplete[2] = TraceValue{0.5, 0.0};
    CHECK_THROWS_AS(bpa_entropy(incomplete, approx), std::invalid_argument);
}

TEST_CASE("raising the cutoff inflates the propagated error on noisy traces") {
    std::map<int, TraceValue> traces;
    for (int m = 1; m <= 9; ++m) traces[m] = TraceValue{std::pow(2.0, 1.0 - m), 1e-4};
    const BpaResult seven = bpa_entropy(traces, chebyshev_coefficients(BpaTarget::NegXLogX, 7));
    const BpaResult nine = bpa_entropy(traces, chebyshev_coefficients(BpaTarget::NegXLogX, 9));
    CHECK(nine.statistical_error > seven.statistical_error);
}

TEST_CASE("power-target bpa recovers non-integer renyi entropies") {
    // GHZ spectrum: S_q = ln 2 for every q
    const ChebyshevApprox approx = chebyshev_coefficients(BpaTarget::Power, 7, 1.5);
    std::map<int, TraceValue> traces;
    for (int m = 1; m <= 7; ++m) traces[m] = TraceValue{std::pow(2.0, 1.0 - m), 0.0};
    const BpaResult r = bpa_entropy(traces, approx);
    CHECK(r.value == doctest::Approx(std::log(2.0)).epsilon(5e-3));
}

TEST_CASE("lambda_max fits") {
    // synthetic exact line: ln Tr = ln 2 + n ln(1/2)
    std::map<int, TraceValue> traces;
    for (int n = 2; n <= 32; ++n) traces[n] = TraceValue{2.0 * std::pow(0.5, n), 0.0};
    const SpectrumFit fit = fit_lambda_max(traces, 10, 32, 10);
    CHECK(fit.lambda_max == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.degeneracy == 2);
    CHECK(fit.s_infinity == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(fit.slope_spread < 1e-12); // all subsets identical on noiseless data
    CHECK(fit.intercept_spread < 1e-10);

    // dominant eigenvalue with a weak subleading one
    std::map<int, TraceValue> two;
    for (int n = 2; n <= 32; ++n)
        two[n] = TraceValue{std::pow(0.9, n) + std::pow(0.1, n), 0.0};
    const SpectrumFit f2 = fit_lambda_max(two, 10, 32, 10);
    CHECK(std::abs(f2.lambda_max - 0.9) < 1e-3);
    CHECK(f2.degeneracy == 1);

    // non-positive traces shrink the window
    std::map<int, TraceValue> holed = two;
    holed[31] = TraceValue{-1.0, 0.0};
    const SpectrumFit f3 = fit_lambda_max(holed, 10, 32, 10);
    CHECK(f3.window_shrunk);
    CHECK(f3.window_hi == 30);

    // window too short
    std::map<int, TraceValue> tiny;
    for (int n = 10; n <= 15; ++n) tiny[n] = TraceValue{std::pow(0.5, n), 0.0};
    CHECK_THROWS_AS(fit_lambda_max(tiny, 10, 32, 10), FitWindowError);
}

TEST_CASE("renyi monotonicity on oracle spectra") {
    const Lattice chain = Lattice::chain_open(10);
    const SiteOrdering ord = build_ordering(OrderingKind::Linear, chain);
    const GroundStateResult gs = exact_ground_state(Hamiltonian(chain, ord));
    for (int cut : {3, 5}) {
        const ReducedSpectrum spec = reduced_spectrum(gs.state, prefix_bipartition(ord, chain, cut));
        double prev = exact_renyi(spec, 2.0);
        for (int n = 3; n <= 12; ++n) {
            const double s = exact_renyi(spec, static_cast<double>(n));
            CHECK(s <= prev + 1e-12);
            prev = s;
        }
    }
}
