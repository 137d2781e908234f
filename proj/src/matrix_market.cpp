#include "qtikhonov/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace qtik {

namespace {

enum class Field { Real, Integer, Complex };
enum class Symmetry { General, Symmetric, SkewSymmetric, Hermitian };

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(source_ + ":" + std::to_string(line_no_) + ": " + what);
  }

  // Next line that is neither blank nor a comment.
  bool next_data(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '%') continue;
      return true;
    }
    return false;
  }

  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    return true;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

Complex read_value(std::istringstream& ls, Field field, Reader& r) {
  double re = 0.0, im = 0.0;
  if (field == Field::Integer) {
    long long v = 0;
    if (!(ls >> v)) r.fail("expected an integer value");
    re = static_cast<double>(v);
  } else {
    if (!(ls >> re)) r.fail("expected a real value");
    if (field == Field::Complex && !(ls >> im)) r.fail("expected the imaginary part");
  }
  std::string extra;
  if (ls >> extra) r.fail("unexpected trailing token '" + extra + "'");
  return {re, im};
}

void mirror(CMatrix& A, Eigen::Index i, Eigen::Index j, Complex v, Symmetry s) {
  A(i, j) = v;
  if (i == j) return;
  switch (s) {
    case Symmetry::General:
      break;
    case Symmetry::Symmetric:
      A(j, i) = v;
      break;
    case Symmetry::SkewSymmetric:
      A(j, i) = -v;
      break;
    case Symmetry::Hermitian:
      A(j, i) = std::conj(v);
      break;
  }
}

}  // namespace

CMatrix read_matrix_market(std::istream& in, const std::string& source) {
  Reader r(in, source);
  std::string line;
  if (!r.next_raw(line)) r.fail("empty file");
  std::istringstream hs(line);
  std::string banner, object, layout, field_s, sym_s;
  hs >> banner >> object >> layout >> field_s >> sym_s;
  if (banner != "%%MatrixMarket") r.fail("missing %%MatrixMarket banner");
  if (lower(object) != "matrix") r.fail("unsupported object '" + object + "'");
  layout = lower(layout);
  if (layout != "coordinate" && layout != "array") r.fail("unsupported layout '" + layout + "'");

  Field field;
  field_s = lower(field_s);
  if (field_s == "real" || field_s == "double") {
    field = Field::Real;
  } else if (field_s == "integer") {
    field = Field::Integer;
  } else if (field_s == "complex") {
    field = Field::Complex;
  } else {
    r.fail("unsupported field '" + field_s + "'");
  }

  Symmetry sym;
  sym_s = lower(sym_s);
  if (sym_s == "general") {
    sym = Symmetry::General;
  } else if (sym_s == "symmetric") {
    sym = Symmetry::Symmetric;
  } else if (sym_s == "skew-symmetric") {
    sym = Symmetry::SkewSymmetric;
  } else if (sym_s == "hermitian") {
    sym = Symmetry::Hermitian;
  } else {
    r.fail("unsupported symmetry '" + sym_s + "'");
  }
  if (sym == Symmetry::Hermitian && field != Field::Complex) r.fail("hermitian requires a complex field");

  if (!r.next_data(line)) r.fail("missing size line");
  std::istringstream ss(line);
  long long rows = 0, cols = 0, nnz = 0;
  if (!(ss >> rows >> cols)) r.fail("malformed size line");
  const bool coordinate = layout == "coordinate";
  if (coordinate && !(ss >> nnz)) r.fail("coordinate size line needs an entry count");
  if (rows < 1 || cols < 1 || nnz < 0) r.fail("nonpositive dimensions");
  if (sym != Symmetry::General && rows != cols) r.fail("symmetric storage needs a square matrix");

  CMatrix A = CMatrix::Zero(rows, cols);
  if (coordinate) {
    std::set<std::pair<long long, long long>> seen;
    for (long long k = 0; k < nnz; ++k) {
      if (!r.next_data(line)) r.fail("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k));
      std::istringstream ls(line);
      long long i = 0, j = 0;
      if (!(ls >> i >> j)) r.fail("malformed entry");
      if (i < 1 || i > rows || j < 1 || j > cols) {
        r.fail("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of bounds");
      }
      if (sym != Symmetry::General && j > i) r.fail("entry above the diagonal in symmetric storage");
      if (sym == Symmetry::SkewSymmetric && i == j) r.fail("diagonal entry in skew-symmetric storage");
      if (!seen.emplace(i, j).second) {
        r.fail("duplicate entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      const Complex v = read_value(ls, field, r);
      if (sym == Symmetry::Hermitian && i == j && v.imag() != 0.0) r.fail("complex diagonal in hermitian storage");
      mirror(A, i - 1, j - 1, v, sym);
    }
  } else {
    // Column-major, lower triangle only for the symmetric kinds.
    for (long long j = 0; j < cols; ++j) {
      const long long start = sym == Symmetry::General ? 0 : (sym == Symmetry::SkewSymmetric ? j + 1 : j);
      for (long long i = start; i < rows; ++i) {
        if (!r.next_data(line)) r.fail("array data ends early");
        std::istringstream ls(line);
        mirror(A, i, j, read_value(ls, field, r), sym);
      }
    }
  }
  if (r.next_data(line)) r.fail("unexpected data after the last entry");
  return A;
}

CMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  return read_matrix_market(in, path);
}

CVector load_vector(const std::string& path) {
  const CMatrix M = load_matrix(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw InputError(path + ": expected a vector, got " + std::to_string(M.rows()) + " x " +
                   std::to_string(M.cols()));
}

void write_matrix_market(std::ostream& out, const CMatrix& A) {
  const bool complex = (A.imag().array() != 0.0).any();
  out << "%%MatrixMarket matrix array " << (complex ? "complex" : "real") << " general\n";
  out << A.rows() << ' ' << A.cols() << '\n';
  char buf[64];
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (complex) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", A(i, j).real(), A(i, j).imag());
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", A(i, j).real());
      }
      out << buf << '\n';
    }
  }
}

void save_matrix(const std::string& path, const CMatrix& A) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");
  write_matrix_market(out, A);
  if (!out) throw InputError(path + ": write failed");
}

}  // namespace qtik
