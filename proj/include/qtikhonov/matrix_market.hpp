#pragma once

// Matrix Market text format: coordinate and array layouts; real, integer and
// complex fields; general, symmetric, skew-symmetric and hermitian symmetry.
// Pattern matrices are rejected. Errors are InputError with "path:line: ".

#include <iosfwd>
#include <string>

#include "qtikhonov/types.hpp"

namespace qtik {

CMatrix read_matrix_market(std::istream& in, const std::string& source = "<stream>");
CMatrix load_matrix(const std::string& path);

/// A vector is any n x 1 or 1 x n matrix.
CVector load_vector(const std::string& path);

/// Writes the array layout with %.17g values; the field is real when every
/// imaginary part is zero, complex otherwise.
void write_matrix_market(std::ostream& out, const CMatrix& A);
void save_matrix(const std::string& path, const CMatrix& A);

}  // namespace qtik
