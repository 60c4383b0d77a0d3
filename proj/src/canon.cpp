#include "faast/canon.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace faast::canon {

std::uint64_t order_key(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    return (bits & 0x8000000000000000ull) ? ~bits : (bits | 0x8000000000000000ull);
}

bool row_less(const double* a, const double* b, int n) {
    for (int i = 0; i < n; ++i) {
        std::uint64_t ka = order_key(a[i]), kb = order_key(b[i]);
        if (ka != kb) return ka < kb;
    }
    return false;
}

namespace {

// Sorted row order of a row-major view given by a row-fetch callback.
template <typename Fetch>
RowGroups group_impl(int n, int cols, Fetch&& fetch) {
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<Eigen::RowVectorXd> rows(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<size_t>(i)] = fetch(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return row_less(rows[static_cast<size_t>(a)].data(), rows[static_cast<size_t>(b)].data(), cols);
    });

    RowGroups out;
    out.group_of.assign(static_cast<size_t>(n), 0);
    int groups = 0;
    for (int k = 0; k < n; ++k) {
        int i = order[static_cast<size_t>(k)];
        if (k == 0 || row_less(rows[static_cast<size_t>(order[static_cast<size_t>(k - 1)])].data(),
                               rows[static_cast<size_t>(i)].data(), cols))
            ++groups;
        out.group_of[static_cast<size_t>(i)] = groups - 1;
    }
    out.unique.resize(groups, cols);
    for (int i = 0; i < n; ++i) out.unique.row(out.group_of[static_cast<size_t>(i)]) = rows[static_cast<size_t>(i)];
    return out;
}

}  // namespace

RowGroups group_rows(const Eigen::MatrixXd& x) {
    return group_impl(static_cast<int>(x.rows()), static_cast<int>(x.cols()),
                      [&](int i) -> Eigen::RowVectorXd { return x.row(i); });
}

RowGroups group_rows_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    int cols = static_cast<int>(a.cols() + b.cols());
    return group_impl(static_cast<int>(a.rows()), cols, [&](int i) {
        Eigen::RowVectorXd row(cols);
        row.head(a.cols()) = a.row(i);
        row.tail(b.cols()) = b.row(i);
        return row;
    });
}

Eigen::MatrixXd linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                       const Eigen::RowVectorXd& b) {
    RowGroups g = group_rows(x);
    Eigen::MatrixXd yu = g.unique * w;
    yu.rowwise() += b;
    Eigen::MatrixXd y(x.rows(), w.cols());
    for (int i = 0; i < x.rows(); ++i) y.row(i) = yu.row(g.group_of[static_cast<size_t>(i)]);
    return y;
}

namespace {

Eigen::RowVectorXd sum_sorted(std::vector<Eigen::RowVectorXd> rows, int cols) {
    std::sort(rows.begin(), rows.end(), [cols](const auto& a, const auto& b) {
        return row_less(a.data(), b.data(), cols);
    });
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(cols);
    for (const auto& r : rows) acc += r;
    return acc;
}

}  // namespace

Eigen::RowVectorXd sum_rows(const Eigen::MatrixXd& x) {
    std::vector<Eigen::RowVectorXd> rows;
    rows.reserve(static_cast<size_t>(x.rows()));
    for (int i = 0; i < x.rows(); ++i) rows.emplace_back(x.row(i));
    return sum_sorted(std::move(rows), static_cast<int>(x.cols()));
}

Eigen::RowVectorXd sum_rows_subset(const Eigen::MatrixXd& x, const std::vector<int>& idx) {
    std::vector<Eigen::RowVectorXd> rows;
    rows.reserve(idx.size());
    for (int i : idx) rows.emplace_back(x.row(i));
    return sum_sorted(std::move(rows), static_cast<int>(x.cols()));
}

Eigen::RowVectorXd weighted_sum_rows(const Eigen::VectorXd& w, const Eigen::MatrixXd& x) {
    std::vector<Eigen::RowVectorXd> rows;
    rows.reserve(static_cast<size_t>(x.rows()));
    for (int i = 0; i < x.rows(); ++i) rows.emplace_back(w(i) * x.row(i));
    return sum_sorted(std::move(rows), static_cast<int>(x.cols()));
}

double sum_values(std::vector<double> values) {
    std::sort(values.begin(), values.end(),
              [](double a, double b) { return order_key(a) < order_key(b); });
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
}

}  // namespace faast::canon
