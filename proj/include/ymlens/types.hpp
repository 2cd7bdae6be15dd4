#ifndef YMLENS_TYPES_HPP
#define YMLENS_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace ymlens {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Cplx = std::complex<double>;

// Error taxonomy. ConfigError maps to CLI exit code 2, the rest to 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct StructuralError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct NumericsError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};

}  // namespace ymlens

#endif
