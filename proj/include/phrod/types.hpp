#ifndef PHROD_TYPES_HPP
#define PHROD_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>

namespace phrod {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using VecX = Eigen::VectorXd;

using Mat3 = Eigen::Matrix3d;
using Mat39 = Eigen::Matrix<double, 3, 9>;
using Mat69 = Eigen::Matrix<double, 6, 9>;
using Mat93 = Eigen::Matrix<double, 9, 3>;
using Mat99 = Eigen::Matrix<double, 9, 9>;
using MatX = Eigen::MatrixXd;

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Exit-code carrying error hierarchy. main() maps these onto process codes.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace phrod

#endif
