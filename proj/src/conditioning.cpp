#include "lattassoc/conditioning.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lattassoc/error.hpp"

namespace lattassoc {

namespace {

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

void ConditioningSet::validate(const AttributeTable& table) const {
    if (i == j) throw Error(ErrorCode::InvalidArgument, "conditioning targets must differ ('" + i + "')");
    for (const std::string* name : {&i, &j}) {
        if (!table.contains(*name)) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + *name + "'");
    }
    for (std::size_t a = 0; a < given.size(); ++a) {
        const std::string& g = given[a];
        if (!table.contains(g)) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + g + "'");
        if (g == i || g == j) {
            throw Error(ErrorCode::InvalidArgument, "'" + g + "' is both a target and a conditioning variable");
        }
        if (std::find(given.begin(), given.begin() + static_cast<std::ptrdiff_t>(a), g) !=
            given.begin() + static_cast<std::ptrdiff_t>(a)) {
            throw Error(ErrorCode::InvalidArgument, "conditioning variable '" + g + "' repeated");
        }
    }
}

std::vector<double> residualize(std::span<const double> target,
                                const std::vector<std::span<const double>>& given,
                                std::vector<std::size_t>* dropped) {
    const std::size_t n = target.size();
    for (const auto& g : given) {
        if (g.size() != n) throw Error(ErrorCode::LengthMismatch, "conditioning vector length mismatch");
    }
    if (n <= given.size() + 1) {
        throw Error(ErrorCode::InvalidArgument, "residualization needs more sites than conditioning variables + 1");
    }

    // Design columns: constant, then each centred given scaled to unit norm.
    // Centring and scaling leave the column span unchanged and make the
    // singular-value rank test independent of the variables' units.
    std::vector<Eigen::VectorXd> columns;
    columns.emplace_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / std::sqrt(double(n))));
    for (std::size_t a = 0; a < given.size(); ++a) {
        const double mu = mean_of(given[a]);
        Eigen::VectorXd col(static_cast<Eigen::Index>(n));
        double max_abs = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            col[static_cast<Eigen::Index>(s)] = given[a][s] - mu;
            max_abs = std::max(max_abs, std::abs(given[a][s]));
        }
        const double norm = col.norm();
        if (norm <= 1e-13 * max_abs * std::sqrt(double(n)) || norm == 0.0) {
            if (dropped) dropped->push_back(a);
            continue;
        }
        columns.emplace_back(col / norm);
    }

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) design.col(static_cast<Eigen::Index>(c)) = columns[c];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv.minCoeff() < rank_tolerance * sv.maxCoeff()) {
        throw Error(ErrorCode::RankDeficient, "conditioning design is numerically rank deficient");
    }

    const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(n));
    const Eigen::MatrixXd& u = svd.matrixU();
    Eigen::VectorXd r = y - u * (u.transpose() * y);
    // One reorthogonalization pass keeps the residual orthogonal to the design
    // at machine precision even when y is nearly in its span.
    r -= u * (u.transpose() * r);

    const double centred_norm = (y.array() - y.mean()).matrix().norm();
    std::vector<double> out(n, 0.0);
    if (r.norm() > 1e-10 * centred_norm) {
        for (std::size_t s = 0; s < n; ++s) out[s] = r[static_cast<Eigen::Index>(s)];
    }
    return out;
}

ConditionalField residualize(const AttributeTable& table, const std::string& target,
                             std::span<const std::string> given) {
    const auto& y = table.variable(target);
    std::vector<std::span<const double>> columns;
    for (const std::string& g : given) {
        if (g == target) {
            throw Error(ErrorCode::InvalidArgument, "'" + g + "' cannot condition on itself");
        }
        columns.emplace_back(table.variable(g));
    }
    std::vector<std::size_t> dropped;
    ConditionalField field;
    field.name = target;
    field.values = residualize(y, columns, &dropped);
    field.mean = mean_of(field.values);
    for (std::size_t a : dropped) field.dropped.push_back(given[a]);
    return field;
}

}  // namespace lattassoc
