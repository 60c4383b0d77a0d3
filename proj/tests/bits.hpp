#pragma once

#include <cstring>

#include <Eigen/Dense>

// Bitwise equality for dense expressions (materializes contiguous copies).
inline bool bits_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<size_t>(a.size())) == 0;
}
