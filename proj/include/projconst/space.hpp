#pragma once

#include "projconst/chebyshev.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace projconst {

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankTolerance = 1e-10;

/// A finite-dimensional space of polynomials on [-1, 1]. Column m of
/// coefficients() holds the Chebyshev coefficients of basis element u_m; the
/// generators are kept verbatim, so bounds and measures refer to the user's
/// basis.
class PolySpace {
public:
    /// Throws RankDeficient when the columns are dependent.
    PolySpace(Eigen::MatrixXd coefficients, std::string label = {});

    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(coeffs_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd &coefficients() const noexcept { return coeffs_; }
    /// Orthonormal basis of the column span (degree+1 x dim), used for rank checks.
    [[nodiscard]] const Eigen::MatrixXd &orthonormal() const noexcept { return orthonormal_; }
    [[nodiscard]] const std::string &label() const noexcept { return label_; }

    /// Coefficients padded with zero rows up to `rows` (>= degree + 1).
    [[nodiscard]] Eigen::MatrixXd padded_coefficients(int rows) const;

    [[nodiscard]] ChebSeries generator(int m) const;
    [[nodiscard]] double eval(int m, double x) const;

private:
    Eigen::MatrixXd coeffs_;
    Eigen::MatrixXd orthonormal_;
    int degree_ = 0;
    std::string label_;
};

/// Builds a space from generators. Throws InvalidArgument on an empty list and
/// RankDeficient when the generators are linearly dependent.
[[nodiscard]] PolySpace make_space(std::span<const ChebSeries> generators, std::string label = {});

[[nodiscard]] PolySpace polynomials_up_to(int d);
[[nodiscard]] PolySpace monomial_span(std::span<const int> powers);
[[nodiscard]] PolySpace first_kind_span(std::span<const int> indices);
[[nodiscard]] PolySpace second_kind_span(std::span<const int> indices);

/// Parses `P:<d>`, `mono:<i,j,...>`, `cheb1:<i,...>` or `cheb2:<i,...>` with
/// decimal indices and no whitespace. Throws ParseError with the position of
/// the offending token; RankDeficient passes through (repeated indices).
[[nodiscard]] PolySpace parse_space_spec(std::string_view text);

/// Even/odd decomposition U = U_e (+) U_o of a parity-invariant space.
struct ParitySplit {
    std::optional<PolySpace> even;  // empty when the space has no even part
    std::optional<PolySpace> odd;
    int degree = 0;  // degree of the whole space
    /// Change of basis: user generator j = sum_i to_split(i, j) * s_i, where
    /// s = (even basis, odd basis).
    Eigen::MatrixXd to_split;

    [[nodiscard]] int even_dim() const noexcept { return even ? even->dim() : 0; }
    [[nodiscard]] int odd_dim() const noexcept { return odd ? odd->dim() : 0; }
};

/// Throws NotSymmetric when u in U does not imply u(-.) in U.
[[nodiscard]] ParitySplit parity_split(const PolySpace &space);

/// True when parity_split would succeed.
[[nodiscard]] bool is_parity_invariant(const PolySpace &space);

/// Chebyshev coefficients of t -> u_m((t + 1) / 2), column by column.
struct ShiftedBasis {
    Eigen::MatrixXd coefficients;
};

[[nodiscard]] ShiftedBasis shift_basis(const Eigen::MatrixXd &coefficients);
[[nodiscard]] inline ShiftedBasis shift_basis(const PolySpace &space) {
    return shift_basis(space.coefficients());
}

/// Matrix with entry (i, m) = value of basis column m at points[i].
[[nodiscard]] Eigen::MatrixXd collocation(const Eigen::MatrixXd &coefficients,
                                          std::span<const double> points);
[[nodiscard]] inline Eigen::MatrixXd collocation(const PolySpace &space,
                                                 std::span<const double> points) {
    return collocation(space.coefficients(), points);
}

/// Numerical rank with the library's relative tolerance.
[[nodiscard]] int numerical_rank(const Eigen::MatrixXd &m);

}  // namespace projconst
