#pragma once

#include "sketchpinv/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sketchpinv {

/// Malformed input; `line()` is 1-based (0 when the error is not tied to a line).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Dense ingestion refuses matrices with more entries than this.
inline constexpr std::int64_t kMaxDenseEntries = 40'000'000;

/// Matrix Market reader: coordinate or array layout; real or integer field;
/// general, symmetric or skew-symmetric storage. The result is dense.
DenseMatrix read_matrix_market(std::istream& in);
DenseMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes the array/real/general layout with shortest round-trip decimal
/// representations, so a read reproduces every entry bit for bit.
void write_matrix_market(std::ostream& out, const DenseMatrix& A);
void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& A);

/// LIBSVM rows "label idx:value ...", 1-based feature indices. Labels are
/// discarded; the design matrix is N x (largest index).
DenseMatrix read_libsvm(std::istream& in);
DenseMatrix read_libsvm(const std::filesystem::path& path);

struct GeneratorSpec {
  enum class Kind { GaussianRankR, SymGaussianRankR, GramFromData };
  Kind kind = Kind::GaussianRankR;
  Index m = 0;
  Index n = 0;
  Index r = 0;
  std::string path;
  std::uint64_t seed = 0;
};

/// Parses "gaussian:m=500,n=20,r=15[,seed=3]", "sym:n=25,r=6[,seed=3]" or "gram:path=FILE".
GeneratorSpec parse_generator_spec(std::string_view text);

DenseMatrix generate(const GeneratorSpec& spec);

/// Best rank-r approximation of an m x n standard normal draw.
DenseMatrix gen_gaussian_rank_r(Index m, Index n, Index r, std::uint64_t seed);

/// Best rank-r approximation of G + G^T, G an n x n standard normal draw;
/// keeps the r eigenpairs of largest magnitude. Exactly symmetric.
DenseMatrix gen_sym_rank_r(Index n, Index r, std::uint64_t seed);

/// Matrix Market when the first non-blank line is a Matrix Market banner, LIBSVM otherwise.
DenseMatrix read_matrix_file(const std::filesystem::path& path);

/// A^T A for the design matrix stored at `path` (Matrix Market or LIBSVM).
DenseMatrix gen_gram(const std::filesystem::path& path);

/// A^T A, exactly symmetric.
DenseMatrix gram(const DenseMatrix& A);

}  // namespace sketchpinv
