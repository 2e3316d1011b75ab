#include "gramqubo/qubo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace gramqubo {

QuboProblem build_class_qubo(const Eigen::MatrixXd& g_lambda, const Eigen::VectorXd& g_c, const PrecisionVector& p,
                             bool diagonal_mode) {
    const Eigen::Index params = g_lambda.rows();
    if (g_lambda.cols() != params || g_c.size() != params) {
        throw std::invalid_argument("build_class_qubo: G_lambda is " + std::to_string(g_lambda.rows()) + "x" +
                                    std::to_string(g_lambda.cols()) + " but g_c has length " +
                                    std::to_string(g_c.size()));
    }
    Eigen::MatrixXd curvature = g_lambda;
    if (diagonal_mode) {
        curvature = Eigen::MatrixXd(g_lambda.diagonal().asDiagonal());
    }
    const auto k = static_cast<Eigen::Index>(p.bits());
    const double delta = p.delta_max();
    const Eigen::Map<const Eigen::VectorXd> pv(p.values().data(), k);
    const Eigen::MatrixXd ppt = pv * pv.transpose();

    QuboProblem out(static_cast<std::size_t>(params * k));
    for (Eigen::Index l = 0; l < params; ++l) {
        for (Eigen::Index j = 0; j < params; ++j) {
            const double gjl = curvature(j, l);
            if (gjl == 0.0) continue;
            out.quadratic.block(j * k, l * k, k, k) = (4.0 * gjl) * ppt;
        }
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(params);
    const Eigen::VectorXd shifted = g_c - delta * (curvature * ones);
    for (Eigen::Index j = 0; j < params; ++j) {
        out.linear.segment(j * k, k) = (4.0 * shifted(j)) * pv;
    }
    out.offset = 0.5 * delta * delta * ones.dot(curvature * ones) - delta * g_c.sum();
    return out;
}

QuboProblem normalize(QuboProblem problem) {
    double s = 0.0;
    if (problem.quadratic.size() > 0) s = problem.quadratic.cwiseAbs().maxCoeff();
    if (problem.linear.size() > 0) s = std::max(s, problem.linear.cwiseAbs().maxCoeff());
    if (s == 0.0) {
        return problem;
    }
    problem.quadratic /= s;
    problem.linear /= s;
    problem.offset /= s;
    problem.scale *= s;
    return problem;
}

double evaluate(const QuboProblem& problem, std::span<const std::uint8_t> bits) {
    const std::size_t n = problem.size();
    if (bits.size() != n) {
        throw std::invalid_argument("evaluate: " + std::to_string(bits.size()) + " bits for a problem of size " +
                                    std::to_string(n));
    }
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!bits[i]) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        double row = problem.linear(ii);
        for (std::size_t j = 0; j < n; ++j) {
            if (bits[j]) row += problem.quadratic(ii, static_cast<Eigen::Index>(j));
        }
        e += row;
    }
    return e;
}

double evaluate_with_offset(const QuboProblem& problem, std::span<const std::uint8_t> bits) {
    return evaluate(problem, bits) + problem.offset;
}

Sample brute_force_min(const QuboProblem& problem) {
    const std::size_t n = problem.size();
    if (n > 24) {
        throw std::invalid_argument("brute_force_min: n=" + std::to_string(n) + " exceeds 24");
    }
    const auto& q = problem.quadratic;
    // Gray-code walk with cached fields f_i = q_i + 2 sum_j Q_ij b_j.
    BitVector bits(n, 0);
    Eigen::VectorXd field = problem.linear;
    double energy = 0.0;
    double best = 0.0;
    std::uint64_t best_code = 0;
    const double tie_tol = 1e-12;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const auto i = static_cast<std::size_t>(std::countr_zero(step));
        const auto ii = static_cast<Eigen::Index>(i);
        const double qii = q(ii, ii);
        const double delta = bits[i] ? (qii - field(ii)) : (qii + field(ii));
        const double sign = bits[i] ? -1.0 : 1.0;
        bits[i] ^= 1U;
        energy += delta;
        field.noalias() += (2.0 * sign) * q.col(ii);
        const std::uint64_t code = step ^ (step >> 1);
        const double tol = tie_tol * (1.0 + std::abs(best));
        if (energy < best - tol || (energy <= best + tol && code < best_code)) {
            best = energy;
            best_code = code;
        }
    }
    Sample out;
    out.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.bits[i] = static_cast<std::uint8_t>((best_code >> i) & 1U);
    }
    out.energy = evaluate(problem, out.bits);
    return out;
}

std::size_t nonzero_pairs(const QuboProblem& problem) {
    std::size_t count = 0;
    const auto n = problem.quadratic.rows();
    for (Eigen::Index j = 1; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            if (problem.quadratic(i, j) != 0.0) ++count;
        }
    }
    return count;
}

QuboProblem read_qubo_text(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_size = false;
    QuboProblem out;
    std::size_t n = 0;
    double pending_offset = 0.0;
    double pending_scale = 1.0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            // "# offset v" and "# scale v" carry the constant and normalization divisor.
            std::istringstream meta(line.substr(first + 1));
            std::string key;
            double value = 0.0;
            if (meta >> key >> value && (key == "offset" || key == "scale") && std::isfinite(value)) {
                (key == "offset" ? pending_offset : pending_scale) = value;
            }
            continue;
        }
        std::istringstream fields(line);
        if (!have_size) {
            long long value = -1;
            std::string extra;
            if (!(fields >> value) || value < 0 || (fields >> extra)) {
                throw QuboParseError("line " + std::to_string(line_no) + ": expected variable count", line_no);
            }
            n = static_cast<std::size_t>(value);
            out = QuboProblem(n);
            have_size = true;
            continue;
        }
        long long i = -1;
        long long j = -1;
        double v = 0.0;
        std::string extra;
        if (!(fields >> i >> j >> v) || (fields >> extra)) {
            throw QuboParseError("line " + std::to_string(line_no) + ": expected 'i j v'", line_no);
        }
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
            throw QuboParseError("line " + std::to_string(line_no) + ": index out of range for n=" + std::to_string(n),
                                 line_no);
        }
        if (i > j) {
            throw QuboParseError("line " + std::to_string(line_no) + ": expected i <= j", line_no);
        }
        if (!std::isfinite(v)) {
            throw QuboParseError("line " + std::to_string(line_no) + ": non-finite coefficient", line_no);
        }
        if (i == j) {
            out.linear(i) += v;
        } else {
            out.quadratic(i, j) += 0.5 * v;
            out.quadratic(j, i) += 0.5 * v;
        }
    }
    if (!have_size) {
        throw QuboParseError("line " + std::to_string(line_no) + ": missing variable count", line_no);
    }
    out.offset = pending_offset;
    out.scale = pending_scale;
    return out;
}

void write_qubo_text(std::ostream& out, const QuboProblem& problem) {
    const auto n = static_cast<Eigen::Index>(problem.size());
    out << "# offset " << std::setprecision(17) << problem.offset << "\n";
    out << "# scale " << problem.scale << "\n";
    out << n << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lin = problem.linear(i) + problem.quadratic(i, i);
        if (lin != 0.0) out << i << ' ' << i << ' ' << lin << "\n";
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = problem.quadratic(i, j) + problem.quadratic(j, i);
            if (v != 0.0) out << i << ' ' << j << ' ' << v << "\n";
        }
    }
}

}  // namespace gramqubo
