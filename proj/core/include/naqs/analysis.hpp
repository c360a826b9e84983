#pragma once

#include <map>
#include <optional>
#include <vector>

#include "naqs/errors.hpp"

namespace naqs {

enum class BpaTarget { NegXLogX, Power };

// Near-best polynomial approximation of f on [0,1] in the shifted Chebyshev
// basis T_k(2x-1). For -x ln x the coefficients have a closed form with the
// uniform error bound 1/(2 n_c (n_c+1)); for x^q (1 < q < 2) they come from
// interpolation at n_c+1 Chebyshev nodes.
struct ChebyshevApprox {
    BpaTarget target = BpaTarget::NegXLogX;
    double power = 0.0; // exponent q for the Power target
    int cutoff = 0;     // n_c
    std::vector<double> chebyshev; // a_0 .. a_{n_c}
    std::vector<double> monomial;  // alpha_0 .. alpha_{n_c}
    double bound = 0.0;            // uniform error bound (NegXLogX only)

    double eval_chebyshev(double x) const;
    double eval_monomial(double x) const;
};

ChebyshevApprox chebyshev_coefficients(BpaTarget target, int cutoff, double power = 0.0);

// Exact basis change from shifted Chebyshev coefficients to monomials.
std::vector<double> to_monomial(const std::vector<double>& chebyshev);

struct TraceValue {
    double mean = 0.0;
    double stderr_val = 0.0; // 0 marks an exact value
};

struct BpaResult {
    double value = 0.0;             // S_1, or S_q for the Power target
    double statistical_error = 0.0; // sum |alpha_m| stderr_m (propagated for Power)
    double bound_per_eigenvalue = 0.0;
    bool rank_corrected = false; // constant term restored using a known rank
    bool unreliable = false;     // statistical error exceeds the estimate
};

// Evaluates sum_{m>=1} alpha_m Tr[rho^m]. When the rank of rho is known the
// constant term enters as rank * alpha_0 and the total error is bounded by
// rank / (2 n_c (n_c+1)). Without the rank the polynomial is shifted to
// p(x) - p(0) (zero constant term, so zero eigenvalues drop out), which
// doubles the worst-case per-eigenvalue error. Tr[rho^1] = 1 is supplied
// implicitly when missing. For the Power target returns S_q = ln(sum)/(1-q).
BpaResult bpa_entropy(const std::map<int, TraceValue>& traces, const ChebyshevApprox& approx,
                      std::optional<int> rank = std::nullopt);

struct SpectrumFit {
    double lambda_max = 0.0;
    int degeneracy = 1;
    double s_infinity = 0.0; // -ln lambda_max
    double slope_spread = 0.0;
    double intercept_spread = 0.0;
    int window_lo = 0;
    int window_hi = 0;
    int subsets = 0;
    bool window_shrunk = false;
};

// Least-squares lines through (n, ln Tr[rho^n]) over every contiguous subset
// of length >= min_subset inside the window; slope and intercept averaged
// over subsets give lambda_max = exp(slope) and g = round(exp(intercept)).
SpectrumFit fit_lambda_max(const std::map<int, TraceValue>& traces, int window_lo = 10,
                           int window_hi = 32, int min_subset = 10);

} // namespace naqs
