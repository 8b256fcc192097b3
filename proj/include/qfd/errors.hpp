#pragma once

#include <stdexcept>
#include <string>

namespace qfd {

// Base for every exception thrown by this library.
struct qfd_error : std::runtime_error {
  explicit qfd_error(const std::string& what) : std::runtime_error(what) {}
};

// Input required to be Hermitian fails the symmetry check.
struct non_hermitian_input : qfd_error {
  using qfd_error::qfd_error;
};

// An iterative routine (eigensolver, optimizer asked to be strict) gave up.
struct convergence_failure : qfd_error {
  using qfd_error::qfd_error;
};

// Operands have incompatible shapes, or a factor dimension does not divide.
struct dimension_mismatch : qfd_error {
  using qfd_error::qfd_error;
};

// A matrix that must be invertible (or strictly positive) is singular.
struct singular_matrix : qfd_error {
  using qfd_error::qfd_error;
};

// Scalar argument outside the mathematical domain of the function.
struct domain_error : qfd_error {
  using qfd_error::qfd_error;
};

// Requested rank is not in [1, dim].
struct invalid_rank : qfd_error {
  using qfd_error::qfd_error;
};

// Candidate density operator has a bad trace or a too-negative eigenvalue.
struct invalid_density : qfd_error {
  using qfd_error::qfd_error;
};

// A state/operator required to be faithful (strictly positive) is not.
struct non_faithful : qfd_error {
  using qfd_error::qfd_error;
};

// Integration variable or measure atom at a negative location.
struct negative_lambda : qfd_error {
  using qfd_error::qfd_error;
};

// Function-class parameter outside its admissible interval.
struct out_of_range : qfd_error {
  using qfd_error::qfd_error;
};

// Operation requires a regular representing measure and this one is not.
struct not_regular : qfd_error {
  using qfd_error::qfd_error;
};

// Bound parameter (t, s, alpha, epsilon, S, T) outside the admitted set.
struct param_out_of_range : qfd_error {
  using qfd_error::qfd_error;
};

// A divergence difference that must be nonnegative came out negative
// beyond numerical tolerance (inputs violate the data-processing order).
struct negative_difference : qfd_error {
  using qfd_error::qfd_error;
};

// A computed recovery bound failed to dominate the measured trace
// distance; indicates a numerical breakdown, never expected on valid input.
struct bound_violation : qfd_error {
  using qfd_error::qfd_error;
};

// Malformed campaign / CLI configuration.
struct config_error : qfd_error {
  using qfd_error::qfd_error;
};

// Filesystem failure while reading or writing artifacts.
struct io_error : qfd_error {
  using qfd_error::qfd_error;
};

// Syntactically or semantically invalid input file.
struct parse_error : qfd_error {
  using qfd_error::qfd_error;
};

}  // namespace qfd
