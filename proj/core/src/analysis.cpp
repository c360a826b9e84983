#include "naqs/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace naqs {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;
} // namespace

double ChebyshevApprox::eval_chebyshev(double x) const {
    // Clenshaw recurrence in the shifted variable u = 2x - 1
    const double u = 2.0 * x - 1.0;
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = chebyshev.size(); k-- > 1;) {
        const double b0 = 2.0 * u * b1 - b2 + chebyshev[k];
        b2 = b1;
        b1 = b0;
    }
    return u * b1 - b2 + chebyshev[0];
}

double ChebyshevApprox::eval_monomial(double x) const {
    double acc = 0.0;
    for (std::size_t m = monomial.size(); m-- > 0;) acc = acc * x + monomial[m];
    return acc;
}

std::vector<double> to_monomial(const std::vector<double>& chebyshev) {
    const std::size_t terms = chebyshev.size();
    // monomial coefficients of T_k(2x-1) via the recurrence
    // T_{k+1} = 2(2x-1) T_k - T_{k-1}; coefficients are integers, exact in
    // double through n_c ~ 20.
    std::vector<double> prev{1.0};        // T_0
    std::vector<double> curr{-1.0, 2.0};  // T_1(2x-1)
    std::vector<double> out(terms, 0.0);
    if (terms > 0) out[0] += chebyshev[0] * prev[0];
    if (terms > 1)
        for (std::size_t m = 0; m < curr.size(); ++m) out[m] += chebyshev[1] * curr[m];
    for (std::size_t k = 2; k < terms; ++k) {
        std::vector<double> next(k + 1, 0.0);
        for (std::size_t m = 0; m < curr.size(); ++m) {
            next[m + 1] += 4.0 * curr[m];
            next[m] -= 2.0 * curr[m];
        }
        for (std::size_t m = 0; m < prev.size(); ++m) next[m] -= prev[m];
        for (std::size_t m = 0; m < next.size(); ++m) out[m] += chebyshev[k] * next[m];
        prev = std::move(curr);
        curr = std::move(next);
    }
    return out;
}

ChebyshevApprox chebyshev_coefficients(BpaTarget target, int cutoff, double power) {
    if (cutoff < 1) throw std::invalid_argument("cutoff degree must be >= 1");
    ChebyshevApprox approx;
    approx.target = target;
    approx.cutoff = cutoff;
    approx.chebyshev.resize(static_cast<std::size_t>(cutoff) + 1);

    switch (target) {
        case BpaTarget::NegXLogX: {
            approx.chebyshev[0] = kLn2 - 0.5;
            if (cutoff >= 1) approx.chebyshev[1] = kLn2 - 0.75;
            for (int k = 2; k <= cutoff; ++k) {
                const double dk = static_cast<double>(k);
                approx.chebyshev[static_cast<std::size_t>(k)] =
                    ((k % 2 == 0) ? -1.0 : 1.0) / (dk * (dk * dk - 1.0));
            }
            approx.bound = 1.0 / (2.0 * cutoff * (cutoff + 1.0));
            break;
        }
        case BpaTarget::Power: {
            if (!(power > 1.0 && power < 2.0))
                throw std::invalid_argument("power target needs 1 < q < 2");
            approx.power = power;
            // interpolation at the n_c+1 Chebyshev nodes mapped to [0,1]
            const int m = cutoff + 1;
            std::vector<double> theta(static_cast<std::size_t>(m)), values(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) {
                theta[static_cast<std::size_t>(j)] = (2.0 * j + 1.0) * kPi / (2.0 * m);
                const double x = 0.5 * (std::cos(theta[static_cast<std::size_t>(j)]) + 1.0);
                values[static_cast<std::size_t>(j)] = std::pow(x, power);
            }
            for (int k = 0; k <= cutoff; ++k) {
                double sum = 0.0;
                for (int j = 0; j < m; ++j)
                    sum += values[static_cast<std::size_t>(j)] *
                           std::cos(k * theta[static_cast<std::size_t>(j)]);
                approx.chebyshev[static_cast<std::size_t>(k)] = (k == 0 ? 1.0 : 2.0) * sum / m;
            }
            approx.bound = 0.0;
            break;
        }
    }
    approx.monomial = to_monomial(approx.chebyshev);
    return approx;
}

BpaResult bpa_entropy(const std::map<int, TraceValue>& traces_in, const ChebyshevApprox& approx,
                      std::optional<int> rank) {
    std::map<int, TraceValue> traces = traces_in;
    traces.emplace(1, TraceValue{1.0, 0.0}); // Tr[rho^1] = 1, exact

    BpaResult result;
    result.bound_per_eigenvalue = approx.bound;
    result.rank_corrected = rank.has_value();
    double sum = 0.0, err = 0.0;
    if (rank) {
        if (*rank < 1) throw std::invalid_argument("rank must be >= 1");
        sum += approx.monomial[0] * static_cast<double>(*rank);
    }
    for (int m = 1; m <= approx.cutoff; ++m) {
        const auto it = traces.find(m);
        if (it == traces.end())
            throw std::invalid_argument("missing trace for order " + std::to_string(m));
        const double alpha = approx.monomial[static_cast<std::size_t>(m)];
        sum += alpha * it->second.mean;
        err += std::abs(alpha) * it->second.stderr_val;
    }

    if (approx.target == BpaTarget::NegXLogX) {
        result.value = sum;
        result.statistical_error = err;
    } else {
        if (!(sum > 0.0)) throw NonPositiveTrace("BPA trace combination is non-positive");
        const double denom = 1.0 - approx.power;
        result.value = std::log(sum) / denom;
        result.statistical_error = err / (std::abs(denom) * sum);
    }
    result.unreliable = result.statistical_error > std::abs(result.value);
    return result;
}

SpectrumFit fit_lambda_max(const std::map<int, TraceValue>& traces, int window_lo, int window_hi,
                           int min_subset) {
    if (min_subset < 2) throw std::invalid_argument("minimum subset length must be >= 2");

    // longest contiguous run of orders in the window with positive means
    std::vector<std::pair<int, double>> points; // (n, ln mean) of the best run
    std::vector<std::pair<int, double>> run;
    bool shrunk = false;
    for (int n = window_lo; n <= window_hi; ++n) {
        const auto it = traces.find(n);
        const bool valid = it != traces.end() && it->second.mean > 0.0;
        if (valid) {
            run.emplace_back(n, std::log(it->second.mean));
        } else {
            shrunk = true;
            if (run.size() > points.size()) points = run;
            run.clear();
        }
    }
    if (run.size() > points.size()) points = run;
    if (static_cast<int>(points.size()) < min_subset)
        throw FitWindowError("usable fit window shorter than the minimum subset length");

    const int count = static_cast<int>(points.size());
    std::vector<double> slopes, intercepts;
    for (int i = 0; i < count; ++i) {
        for (int j = i + min_subset - 1; j < count; ++j) {
            // ordinary least squares over points[i..j], centered for stability
            const int m = j - i + 1;
            double mx = 0.0, my = 0.0;
            for (int k = i; k <= j; ++k) {
                mx += points[static_cast<std::size_t>(k)].first;
                my += points[static_cast<std::size_t>(k)].second;
            }
            mx /= m;
            my /= m;
            double sxx = 0.0, sxy = 0.0;
            for (int k = i; k <= j; ++k) {
                const double dx = points[static_cast<std::size_t>(k)].first - mx;
                const double dy = points[static_cast<std::size_t>(k)].second - my;
                sxx += dx * dx;
                sxy += dx * dy;
            }
            const double slope = sxy / sxx;
            slopes.push_back(slope);
            intercepts.push_back(my - slope * mx);
        }
    }

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto spread_of = [](const std::vector<double>& v, double center) {
        double s = 0.0;
        for (double x : v) s += (x - center) * (x - center);
        return std::sqrt(s / static_cast<double>(v.size()));
    };

    SpectrumFit fit;
    fit.window_lo = points.front().first;
    fit.window_hi = points.back().first;
    fit.subsets = static_cast<int>(slopes.size());
    fit.window_shrunk = shrunk;
    const double slope_mean = mean_of(slopes);
    const double icept_mean = mean_of(intercepts);
    fit.lambda_max = std::exp(slope_mean);
    fit.degeneracy = std::max(1, static_cast<int>(std::lround(std::exp(icept_mean))));
    fit.s_infinity = -slope_mean;
    fit.slope_spread = spread_of(slopes, slope_mean);
    fit.intercept_spread = spread_of(intercepts, icept_mean);
    return fit;
}

} // namespace naqs
