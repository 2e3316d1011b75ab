#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "gramqubo/encoding.hpp"

namespace gramqubo {

/// Energy E(b) = b^T Q b + q^T b (+ offset). Q is symmetric and the double sum
/// covers both (i,j) and (j,i), so an unordered pair coupling v is stored as
/// Q_ij = Q_ji = v/2. Diagonal entries act linearly since b_i^2 = b_i.
struct QuboProblem {
    Eigen::MatrixXd quadratic;
    Eigen::VectorXd linear;
    double offset = 0.0;
    /// Divisor applied by normalize(); 1 for an unnormalized problem.
    double scale = 1.0;

    QuboProblem() = default;
    explicit QuboProblem(std::size_t n)
        : quadratic(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
          linear(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

    std::size_t size() const { return static_cast<std::size_t>(linear.size()); }
};

struct Sample {
    BitVector bits;
    double energy = 0.0;
};

/// Per-class head QUBO from the regularized Gram matrix and the class gradient:
///   Q = 4 P^T G P,  q = 4 P^T (g - delta G 1),  offset = delta^2/2 1^T G 1 - delta g^T 1
/// with P = I (x) p^T. In diagonal mode the off-diagonal blocks of G are dropped.
QuboProblem build_class_qubo(const Eigen::MatrixXd& g_lambda, const Eigen::VectorXd& g_c, const PrecisionVector& p,
                             bool diagonal_mode = false);

/// Divide Q, q and offset by the largest absolute coefficient; scale accumulates
/// the divisor. A zero problem is returned unchanged.
QuboProblem normalize(QuboProblem problem);

double evaluate(const QuboProblem& problem, std::span<const std::uint8_t> bits);
double evaluate_with_offset(const QuboProblem& problem, std::span<const std::uint8_t> bits);

/// Exhaustive minimizer for n <= 24. Ties go to the lowest integer sum_i b_i 2^i.
Sample brute_force_min(const QuboProblem& problem);

/// Unordered quadratic pairs of an n-variable dense QUBO, n(n-1)/2.
constexpr std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Number of unordered pairs i<j with a nonzero coupling.
std::size_t nonzero_pairs(const QuboProblem& problem);

class QuboParseError : public std::runtime_error {
public:
    QuboParseError(const std::string& what, std::size_t line) : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Text format: first non-comment line "n", then "i j v" lines with 0-based
/// indices; i == j adds v to the linear term, i < j adds an unordered coupling
/// v*b_i*b_j. Lines starting with '#' are comments, except "# offset v" and
/// "# scale v", which set those fields. Repeated entries accumulate.
QuboProblem read_qubo_text(std::istream& in);

/// Writes the same format; offset and scale go into comment lines.
void write_qubo_text(std::ostream& out, const QuboProblem& problem);

}  // namespace gramqubo
