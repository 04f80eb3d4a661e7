#pragma once

#include <vector>

namespace caex {

// Eigenvalues of a dense symmetric matrix (row-major, n x n), ascending.
// Householder tridiagonalization followed by implicit-shift QL.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

double min_symmetric_eigenvalue(const std::vector<double>& a, int n);

}  // namespace caex
