#include "sketchpinv/io.hpp"

#include "sketchpinv/random.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace sketchpinv {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(tok) + "'", line);
  return v;
}

std::int64_t parse_int(std::string_view tok, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("invalid integer '" + std::string(tok) + "'", line);
  }
  return v;
}

void check_dense_size(std::int64_t rows, std::int64_t cols, std::size_t line) {
  if (rows < 0 || cols < 0) throw ParseError("negative dimension", line);
  if (rows > 0 && cols > kMaxDenseEntries / rows) {
    throw ParseError("matrix of " + std::to_string(rows) + " x " + std::to_string(cols) +
                         " exceeds the dense cap of " + std::to_string(kMaxDenseEntries) + " entries",
                     line);
  }
}

enum class Symmetry { General, Symmetric, Skew };

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  return in;
}

std::uint64_t parse_u64(std::string_view tok) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw std::invalid_argument("generator spec: invalid integer '" + std::string(tok) + "'");
  }
  return v;
}

DenseMatrix standard_normal(Index m, Index n, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix G(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) G(i, j) = rng.normal();
  }
  return G;
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

DenseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty input", 0);
  ++lineno;
  const auto header = split_ws(line);
  if (header.size() != 5 || lowercase(std::string(header[0])) != "%%matrixmarket") {
    throw ParseError("malformed header, expected '%%MatrixMarket matrix <format> <field> <symmetry>'", lineno);
  }
  if (lowercase(std::string(header[1])) != "matrix") throw ParseError("unsupported object: " + std::string(header[1]), lineno);
  const std::string format = lowercase(std::string(header[2]));
  const std::string field = lowercase(std::string(header[3]));
  const std::string symmetry_name = lowercase(std::string(header[4]));
  if (format != "coordinate" && format != "array") throw ParseError("unsupported format: " + format, lineno);
  if (field != "real" && field != "integer" && field != "double") throw ParseError("unsupported field: " + field, lineno);
  Symmetry symmetry;
  if (symmetry_name == "general") {
    symmetry = Symmetry::General;
  } else if (symmetry_name == "symmetric") {
    symmetry = Symmetry::Symmetric;
  } else if (symmetry_name == "skew-symmetric") {
    symmetry = Symmetry::Skew;
  } else {
    throw ParseError("unsupported symmetry: " + symmetry_name, lineno);
  }

  // Size line, after comments.
  std::vector<std::string_view> size_tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || is_blank(line)) continue;
    size_tokens = split_ws(line);
    break;
  }
  const bool coordinate = format == "coordinate";
  if (size_tokens.size() != (coordinate ? 3u : 2u)) throw ParseError("malformed size line", lineno);
  const std::int64_t rows = parse_int(size_tokens[0], lineno);
  const std::int64_t cols = parse_int(size_tokens[1], lineno);
  check_dense_size(rows, cols, lineno);
  if (symmetry != Symmetry::General && rows != cols) throw ParseError("symmetric storage requires a square matrix", lineno);

  DenseMatrix A = DenseMatrix::Zero(rows, cols);
  if (coordinate) {
    const std::int64_t nnz = parse_int(size_tokens[2], lineno);
    if (nnz < 0) throw ParseError("negative entry count", lineno);
    std::int64_t seen = 0;
    while (seen < nnz && std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '%' || is_blank(line)) continue;
      const auto tok = split_ws(line);
      if (tok.size() != 3) throw ParseError("expected 'row col value'", lineno);
      const std::int64_t i = parse_int(tok[0], lineno);
      const std::int64_t j = parse_int(tok[1], lineno);
      const double v = parse_real(tok[2], lineno);
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw ParseError("index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range", lineno);
      }
      if (symmetry != Symmetry::General && j > i) throw ParseError("symmetric storage expects the lower triangle", lineno);
      if (symmetry == Symmetry::Skew && i == j) throw ParseError("skew-symmetric storage has no diagonal", lineno);
      A(i - 1, j - 1) += v;
      if (i != j && symmetry == Symmetry::Symmetric) A(j - 1, i - 1) += v;
      if (i != j && symmetry == Symmetry::Skew) A(j - 1, i - 1) -= v;
      ++seen;
    }
    if (seen != nnz) {
      throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen), lineno);
    }
  } else {
    // Column-major values; symmetric layouts list the lower triangle only.
    std::vector<std::pair<std::int64_t, std::int64_t>> slots;
    for (std::int64_t j = 0; j < cols; ++j) {
      const std::int64_t first = symmetry == Symmetry::General ? 0 : (symmetry == Symmetry::Skew ? j + 1 : j);
      for (std::int64_t i = first; i < rows; ++i) slots.emplace_back(i, j);
    }
    std::size_t next = 0;
    while (next < slots.size() && std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '%' || is_blank(line)) continue;
      for (const auto tok : split_ws(line)) {
        if (next >= slots.size()) throw ParseError("too many values", lineno);
        const auto [i, j] = slots[next++];
        const double v = parse_real(tok, lineno);
        A(i, j) = v;
        if (i != j && symmetry == Symmetry::Symmetric) A(j, i) = v;
        if (i != j && symmetry == Symmetry::Skew) A(j, i) = -v;
      }
    }
    if (next != slots.size()) {
      throw ParseError("expected " + std::to_string(slots.size()) + " values, found " + std::to_string(next), lineno);
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!(line.empty() || line[0] == '%' || is_blank(line))) throw ParseError("unexpected trailing data", lineno);
  }
  return A;
}

DenseMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const DenseMatrix& A) {
  out << "%%MatrixMarket matrix array real general\n";
  out << A.rows() << ' ' << A.cols() << '\n';
  char buf[64];
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = 0; i < A.rows(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), A(i, j));
      out.write(buf, res.ptr - buf);
      out.put('\n');
    }
  }
}

void write_matrix_market(const std::filesystem::path& path, const DenseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_matrix_market(out, A);
}

DenseMatrix read_libsvm(std::istream& in) {
  std::vector<std::vector<std::pair<std::int64_t, double>>> rows;
  std::int64_t width = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || is_blank(line)) continue;
    const auto tok = split_ws(line);
    std::vector<std::pair<std::int64_t, double>> row;
    // tok[0] is the label; it only needs to be a number.
    parse_real(tok[0], lineno);
    for (std::size_t t = 1; t < tok.size(); ++t) {
      const auto colon = tok[t].find(':');
      if (colon == std::string_view::npos) throw ParseError("expected 'index:value', got '" + std::string(tok[t]) + "'", lineno);
      const std::int64_t idx = parse_int(tok[t].substr(0, colon), lineno);
      if (idx < 1) throw ParseError("feature index must be >= 1", lineno);
      row.emplace_back(idx, parse_real(tok[t].substr(colon + 1), lineno));
      width = std::max(width, idx);
    }
    rows.push_back(std::move(row));
  }
  const auto n_rows = static_cast<std::int64_t>(rows.size());
  check_dense_size(n_rows, width, 0);
  DenseMatrix A = DenseMatrix::Zero(n_rows, width);
  for (std::int64_t i = 0; i < n_rows; ++i) {
    for (const auto& [idx, v] : rows[static_cast<std::size_t>(i)]) A(i, idx - 1) += v;
  }
  return A;
}

DenseMatrix read_libsvm(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_libsvm(in);
}

GeneratorSpec parse_generator_spec(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("generator spec must look like kind:key=value,...");
  const std::string kind(text.substr(0, colon));
  GeneratorSpec spec;
  if (kind == "gaussian") {
    spec.kind = GeneratorSpec::Kind::GaussianRankR;
  } else if (kind == "sym") {
    spec.kind = GeneratorSpec::Kind::SymGaussianRankR;
  } else if (kind == "gram") {
    spec.kind = GeneratorSpec::Kind::GramFromData;
  } else {
    throw std::invalid_argument("unknown generator kind '" + kind + "' (expected gaussian, sym or gram)");
  }

  std::string_view rest = text.substr(colon + 1);
  bool has_m = false, has_n = false, has_r = false;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("generator spec item '" + std::string(item) + "' lacks '='");
    const std::string_view key = item.substr(0, eq);
    const std::string_view value = item.substr(eq + 1);
    if (key == "path" && spec.kind == GeneratorSpec::Kind::GramFromData) {
      spec.path = std::string(value);
    } else if (key == "seed") {
      spec.seed = parse_u64(value);
    } else if (key == "m" && spec.kind == GeneratorSpec::Kind::GaussianRankR) {
      spec.m = static_cast<Index>(parse_u64(value));
      has_m = true;
    } else if (key == "n" && spec.kind != GeneratorSpec::Kind::GramFromData) {
      spec.n = static_cast<Index>(parse_u64(value));
      has_n = true;
    } else if (key == "r" && spec.kind != GeneratorSpec::Kind::GramFromData) {
      spec.r = static_cast<Index>(parse_u64(value));
      has_r = true;
    } else {
      throw std::invalid_argument("unknown key '" + std::string(key) + "' for generator '" + kind + "'");
    }
  }
  switch (spec.kind) {
    case GeneratorSpec::Kind::GaussianRankR:
      if (!has_m || !has_n || !has_r) throw std::invalid_argument("gaussian generator needs m, n and r");
      break;
    case GeneratorSpec::Kind::SymGaussianRankR:
      if (!has_n || !has_r) throw std::invalid_argument("sym generator needs n and r");
      spec.m = spec.n;
      break;
    case GeneratorSpec::Kind::GramFromData:
      if (spec.path.empty()) throw std::invalid_argument("gram generator needs path");
      break;
  }
  return spec;
}

DenseMatrix generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorSpec::Kind::GaussianRankR:
      return gen_gaussian_rank_r(spec.m, spec.n, spec.r, spec.seed);
    case GeneratorSpec::Kind::SymGaussianRankR:
      return gen_sym_rank_r(spec.n, spec.r, spec.seed);
    case GeneratorSpec::Kind::GramFromData:
      return gen_gram(spec.path);
  }
  throw std::logic_error("unreachable generator kind");
}

DenseMatrix gen_gaussian_rank_r(Index m, Index n, Index r, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("gaussian generator: dimensions must be positive");
  if (r < 1 || r > std::min(m, n)) throw std::invalid_argument("gaussian generator: need 1 <= r <= min(m, n)");
  if (m > kMaxDenseEntries / n) throw std::invalid_argument("gaussian generator: exceeds the dense cap");
  DenseMatrix G = standard_normal(m, n, seed);
  if (r == std::min(m, n)) return G;
  Eigen::BDCSVD<DenseMatrix> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

DenseMatrix gen_sym_rank_r(Index n, Index r, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sym generator: dimension must be positive");
  if (r < 1 || r > n) throw std::invalid_argument("sym generator: need 1 <= r <= n");
  if (n > kMaxDenseEntries / n) throw std::invalid_argument("sym generator: exceeds the dense cap");
  const DenseMatrix G = standard_normal(n, n, seed);
  DenseMatrix H = G + G.transpose();
  if (r == n) return H;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(H);
  const Vector& lambda = eig.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(lambda(a)) > std::abs(lambda(b)); });
  DenseMatrix V(n, r);
  Vector kept(r);
  for (Index k = 0; k < r; ++k) {
    V.col(k) = eig.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    kept(k) = lambda(order[static_cast<std::size_t>(k)]);
  }
  const DenseMatrix low = V * kept.asDiagonal() * V.transpose();
  return 0.5 * (low + low.transpose());
}

DenseMatrix gram(const DenseMatrix& A) {
  const DenseMatrix G = A.transpose() * A;
  return 0.5 * (G + G.transpose());
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::string first;
  while (std::getline(in, first)) {
    if (!is_blank(first)) break;
  }
  in.clear();
  in.seekg(0);
  const bool matrix_market = lowercase(first.substr(0, 14)) == "%%matrixmarket";
  return matrix_market ? read_matrix_market(in) : read_libsvm(in);
}

DenseMatrix gen_gram(const std::filesystem::path& path) { return gram(read_matrix_file(path)); }

}  // namespace sketchpinv
