#include "projconst/chebyshev.hpp"

#include "projconst/errors.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace projconst {

namespace {

// Binomial coefficient, exact in int64 for n <= 60.
std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

void check_degree(int n) {
    if (n < 0 || n > kMaxExactDegree) {
        throw Error(ErrorCode::InvalidArgument,
                    "degree " + std::to_string(n) + " outside supported range [0, " +
                        std::to_string(kMaxExactDegree) + "]");
    }
}

// Power-basis coefficients of T_n as exact integers.
std::vector<std::int64_t> cheb_power_coeffs(int n) {
    std::vector<std::int64_t> prev{1};
    if (n == 0) return prev;
    std::vector<std::int64_t> cur{0, 1};
    for (int k = 1; k < n; ++k) {
        std::vector<std::int64_t> next(static_cast<std::size_t>(k) + 2, 0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2 * cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

ChebSeries::ChebSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

int ChebSeries::true_degree() const noexcept {
    for (int k = degree(); k > 0; --k) {
        if (coeffs_[static_cast<std::size_t>(k)] != 0.0) return k;
    }
    return 0;
}

double ChebSeries::operator()(double x) const { return cheb_eval(coeffs_, x); }

ChebSeries ChebSeries::first_kind(int n) {
    check_degree(n);
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c.back() = 1.0;
    return ChebSeries(std::move(c));
}

ChebSeries ChebSeries::second_kind(int n) {
    check_degree(n);
    // U_n = 2 (T_n + T_{n-2} + ...) with the T_0 term (n even) counted once.
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = n; j >= 0; j -= 2) c[static_cast<std::size_t>(j)] = (j == 0) ? 1.0 : 2.0;
    return ChebSeries(std::move(c));
}

ChebSeries ChebSeries::monomial(int n) {
    check_degree(n);
    std::vector<double> mono(static_cast<std::size_t>(n) + 1, 0.0);
    mono.back() = 1.0;
    return monomial_to_cheb(mono);
}

double cheb_eval(std::span<const double> coeffs, double x) {
    assert(std::abs(x) <= 1.0 + 1e-12 && "Chebyshev evaluation outside [-1, 1]");
    if (coeffs.empty()) return 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = coeffs.size() - 1; k >= 1; --k) {
        const double b0 = coeffs[k] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return coeffs[0] + x * b1 - b2;
}

double cheb2_eval(int n, double x) {
    if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative Chebyshev index");
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::vector<double> cheb_zeros(int L) {
    if (L < 1) throw Error(ErrorCode::InvalidGrid, "Chebyshev grid needs L >= 1");
    std::vector<double> w(static_cast<std::size_t>(L));
    for (int l = 1; l <= L; ++l) {
        w[static_cast<std::size_t>(l - 1)] = std::cos(std::numbers::pi * (l - 0.5) / L);
    }
    // cos(pi/2) is not exactly zero in floating point; pin the centre so the
    // grid is exactly antisymmetric.
    if (L % 2 == 1) w[static_cast<std::size_t>(L / 2)] = 0.0;
    for (int l = 0; l < L / 2; ++l) {
        w[static_cast<std::size_t>(L - 1 - l)] = -w[static_cast<std::size_t>(l)];
    }
    return w;
}

std::vector<double> positive_cheb_zeros(int L) {
    if (L < 1) throw Error(ErrorCode::InvalidGrid, "Chebyshev grid needs L >= 1");
    std::vector<double> w(static_cast<std::size_t>(L));
    for (int l = 1; l <= L; ++l) {
        w[static_cast<std::size_t>(l - 1)] = std::cos(std::numbers::pi * (l - 0.5) / (2.0 * L));
    }
    return w;
}

double oversampling_factor(int d, int L, bool symmetric) {
    if (d < 0) throw Error(ErrorCode::InvalidArgument, "negative degree");
    if (L < 1) throw Error(ErrorCode::InvalidGrid, "Chebyshev grid needs L >= 1");
    const int grid = symmetric ? 2 * L : L;
    if (grid <= d) {
        throw Error(ErrorCode::InvalidGrid,
                    "grid too coarse for degree " + std::to_string(d) + ": need " +
                        (symmetric ? std::string("2L > d") : std::string("L > d")) +
                        ", got L = " + std::to_string(L));
    }
    return 1.0 / std::cos(std::numbers::pi * d / (2.0 * grid));
}

ChebSeries monomial_to_cheb(std::span<const double> mono_coeffs) {
    const int n = mono_coeffs.empty() ? 0 : static_cast<int>(mono_coeffs.size()) - 1;
    check_degree(n);
    std::vector<long double> acc(static_cast<std::size_t>(n) + 1, 0.0L);
    for (int p = 0; p <= n; ++p) {
        const double a = mono_coeffs[static_cast<std::size_t>(p)];
        if (a == 0.0) continue;
        // x^p = 2^{1-p} sum_k C(p,k) T_{p-2k}, T_0 term halved.
        for (int k = 0; 2 * k <= p; ++k) {
            const int j = p - 2 * k;
            long double w = static_cast<long double>(binomial(p, k)) / std::ldexp(1.0L, p);
            if (j > 0) w *= 2.0L;
            acc[static_cast<std::size_t>(j)] += static_cast<long double>(a) * w;
        }
    }
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<double>(acc[i]);
    return ChebSeries(std::move(out));
}

std::vector<double> cheb_to_monomial(const ChebSeries &series) {
    const int n = series.degree();
    check_degree(n);
    std::vector<long double> acc(static_cast<std::size_t>(n) + 1, 0.0L);
    for (int j = 0; j <= n; ++j) {
        const double c = series[j];
        if (c == 0.0) continue;
        const auto t = cheb_power_coeffs(j);
        for (std::size_t i = 0; i < t.size(); ++i) {
            acc[i] += static_cast<long double>(c) * static_cast<long double>(t[i]);
        }
    }
    std::vector<double> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<double>(acc[i]);
    return out;
}

ChebSeries shift_to_half_interval(const ChebSeries &series) {
    // Interpolate t -> p((t+1)/2) at N Chebyshev zeros; exact for degree < N.
    const int N = series.degree() + 1;
    std::vector<double> values(static_cast<std::size_t>(N));
    std::vector<double> angles(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        angles[static_cast<std::size_t>(i)] = std::numbers::pi * (i + 0.5) / N;
        const double t = std::cos(angles[static_cast<std::size_t>(i)]);
        values[static_cast<std::size_t>(i)] = series((t + 1.0) / 2.0);
    }
    std::vector<double> c(static_cast<std::size_t>(N), 0.0);
    for (int j = 0; j < N; ++j) {
        long double sum = 0.0L;
        for (int i = 0; i < N; ++i) {
            sum += static_cast<long double>(values[static_cast<std::size_t>(i)]) *
                   std::cos(static_cast<long double>(j) * angles[static_cast<std::size_t>(i)]);
        }
        c[static_cast<std::size_t>(j)] = static_cast<double>(sum * (j == 0 ? 1.0L : 2.0L) / N);
    }
    return ChebSeries(std::move(c));
}

}  // namespace projconst
