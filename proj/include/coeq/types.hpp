#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace coeq {

using cplx = std::complex<double>;

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

constexpr double kDbFloor = -100.0;  // reported instead of -inf for perfect equalization

inline double to_db(double linear) {
    if (!(linear > 0.0)) return kDbFloor;
    double db = 10.0 * std::log10(linear);
    return db < kDbFloor ? kDbFloor : db;
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace coeq
