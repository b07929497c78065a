#pragma once

#include <span>
#include <vector>

namespace projconst {

/// Polynomial stored by its coefficients c_0..c_d in the first-kind
/// Chebyshev basis T_0..T_d. Trailing zeros are allowed; the stored length
/// is always degree() + 1.
class ChebSeries {
public:
    ChebSeries() : coeffs_{0.0} {}
    explicit ChebSeries(std::vector<double> coeffs);

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    /// Index of the last nonzero coefficient (0 for the zero polynomial).
    [[nodiscard]] int true_degree() const noexcept;
    [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] double operator[](int k) const { return coeffs_.at(static_cast<std::size_t>(k)); }
    [[nodiscard]] double operator()(double x) const;

    static ChebSeries first_kind(int n);
    static ChebSeries second_kind(int n);
    static ChebSeries monomial(int n);

private:
    std::vector<double> coeffs_;
};

/// Clenshaw backward recurrence for sum_k c_k T_k(x).
[[nodiscard]] double cheb_eval(std::span<const double> coeffs, double x);
[[nodiscard]] inline double cheb_eval(const ChebSeries &series, double x) {
    return cheb_eval(series.coeffs(), x);
}

/// U_n(x) by the three-term recurrence; equals sin((n+1)t)/sin(t) at x = cos(t).
[[nodiscard]] double cheb2_eval(int n, double x);

/// Chebyshev zeros cos(pi (l - 1/2) / L), l = 1..L, strictly decreasing.
[[nodiscard]] std::vector<double> cheb_zeros(int L);

/// Positive Chebyshev zeros cos(pi (l - 1/2) / (2L)), l = 1..L.
[[nodiscard]] std::vector<double> positive_cheb_zeros(int L);

/// Factor rho >= 1 with max_{[-1,1]} |p| <= rho * max over the check grid, for
/// polynomials of degree d. General grid: 1/cos(pi d / (2L)); symmetric grid
/// (positive zeros, even/odd parts): 1/cos(pi d / (4L)).
[[nodiscard]] double oversampling_factor(int d, int L, bool symmetric);

/// Exact conversion of power-basis coefficients (a_0 + a_1 x + ...) to the
/// first-kind Chebyshev basis. Supported up to degree 30.
[[nodiscard]] ChebSeries monomial_to_cheb(std::span<const double> mono_coeffs);

/// Inverse of monomial_to_cheb.
[[nodiscard]] std::vector<double> cheb_to_monomial(const ChebSeries &series);

/// Chebyshev coefficients of t -> p((t + 1) / 2).
[[nodiscard]] ChebSeries shift_to_half_interval(const ChebSeries &series);

inline constexpr int kMaxExactDegree = 30;

}  // namespace projconst
