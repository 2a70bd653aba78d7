#include "hankelid/model.hpp"

#include "hankelid/error.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hankelid {

Dataset::Dataset(Matrix u, Matrix y) : u_(std::move(u)), y_(std::move(y)) {
  if (u_.rows() != y_.rows()) throw InvalidArgument("input and output sample counts differ");
  if (u_.rows() < 1) throw InvalidArgument("dataset needs at least one sample");
  if (u_.cols() < 1 || y_.cols() < 1) throw InvalidArgument("dataset needs m >= 1 and p >= 1");
  if (!u_.allFinite() || !y_.allFinite()) throw InvalidArgument("dataset contains non-finite values");
}

Dataset Dataset::head(Index count) const {
  if (count < 1 || count > samples()) throw InvalidArgument("head: count out of range");
  return Dataset(u_.topRows(count), y_.topRows(count));
}

ImpulseResponse::ImpulseResponse(Index lags, Index outputs, Index inputs)
    : h_(Vector::Zero(lags * outputs * inputs)), lags_(lags), outputs_(outputs), inputs_(inputs) {
  if (lags < 1 || outputs < 1 || inputs < 1) throw InvalidArgument("impulse response dimensions must be positive");
}

ImpulseResponse::ImpulseResponse(Vector stacked, Index lags, Index outputs, Index inputs)
    : h_(std::move(stacked)), lags_(lags), outputs_(outputs), inputs_(inputs) {
  if (lags < 1 || outputs < 1 || inputs < 1) throw InvalidArgument("impulse response dimensions must be positive");
  if (h_.size() != lags * outputs * inputs) throw InvalidArgument("stacked impulse response has wrong length");
}

ImpulseResponse ImpulseResponse::from_markov(const std::vector<Matrix>& markov) {
  if (markov.empty()) throw InvalidArgument("empty Markov sequence");
  const Index p = markov.front().rows();
  const Index m = markov.front().cols();
  ImpulseResponse h(static_cast<Index>(markov.size()), p, m);
  for (Index k = 1; k <= h.lags(); ++k) {
    const Matrix& hk = markov[static_cast<std::size_t>(k - 1)];
    if (hk.rows() != p || hk.cols() != m) throw InvalidArgument("inconsistent Markov parameter sizes");
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < m; ++j) h.coeff(i, j, k) = hk(i, j);
  }
  return h;
}

Matrix ImpulseResponse::markov(Index k) const {
  Matrix hk(outputs_, inputs_);
  for (Index i = 0; i < outputs_; ++i)
    for (Index j = 0; j < inputs_; ++j) hk(i, j) = coeff(i, j, k);
  return hk;
}

std::vector<Matrix> ImpulseResponse::markov_sequence() const {
  std::vector<Matrix> seq;
  seq.reserve(static_cast<std::size_t>(lags_));
  for (Index k = 1; k <= lags_; ++k) seq.push_back(markov(k));
  return seq;
}

Vector stack_outputs(const Dataset& data) {
  const Index n = data.samples();
  const Index p = data.outputs();
  Vector y(n * p);
  for (Index i = 0; i < p; ++i) y.segment(i * n, n) = data.y().col(i);
  return y;
}

Matrix unstack_outputs(const Vector& stacked, Index samples, Index outputs) {
  if (stacked.size() != samples * outputs) throw InvalidArgument("stacked output length mismatch");
  Matrix y(samples, outputs);
  for (Index i = 0; i < outputs; ++i) y.col(i) = stacked.segment(i * samples, samples);
  return y;
}

Matrix build_phi(const Matrix& u, Index lags) {
  if (lags < 1) throw InvalidArgument("FIR length T must be positive");
  const Index n = u.rows();
  const Index m = u.cols();
  Matrix phi = Matrix::Zero(n, lags * m);
  for (Index i = 0; i < m; ++i) {
    for (Index k = 1; k <= lags; ++k) {
      // column (i, k) holds u_i(t - k)
      const Index len = n - k;
      if (len <= 0) continue;
      phi.col(i * lags + (k - 1)).tail(len) = u.col(i).head(len);
    }
  }
  return phi;
}

Matrix build_regressor(const Dataset& data, Index lags) {
  const Matrix phi = build_phi(data.u(), lags);
  const Index n = data.samples();
  const Index p = data.outputs();
  Matrix full = Matrix::Zero(n * p, phi.cols() * p);
  for (Index i = 0; i < p; ++i) full.block(i * n, i * phi.cols(), n, phi.cols()) = phi;
  return full;
}

Matrix simulate_fir(const ImpulseResponse& h, const Matrix& u) {
  if (u.cols() != h.inputs()) throw InvalidArgument("simulate_fir: input dimension mismatch");
  const Index n = u.rows();
  Matrix y = Matrix::Zero(n, h.outputs());
  for (Index t = 0; t < n; ++t) {
    for (Index k = 1; k <= h.lags() && k <= t; ++k) {
      for (Index i = 0; i < h.outputs(); ++i) {
        double acc = 0.0;
        for (Index j = 0; j < h.inputs(); ++j) acc += h.coeff(i, j, k) * u(t - k, j);
        y(t, i) += acc;
      }
    }
  }
  return y;
}

HankelDims hankel_dims(Index lags, Index outputs, Index inputs) {
  if (lags < 1) throw InvalidArgument("FIR length T must be positive");
  Index best_r = 1;
  Index best_gap = std::numeric_limits<Index>::max();
  for (Index r = 1; r <= lags; ++r) {
    const Index gap = std::abs(outputs * r - inputs * (lags + 1 - r));
    if (gap < best_gap) {
      best_gap = gap;
      best_r = r;
    }
  }
  return HankelDims{best_r, lags + 1 - best_r, lags};
}

Matrix build_hankel(const ImpulseResponse& h, const HankelDims& dims) {
  if (dims.block_rows + dims.block_cols - 1 != h.lags()) throw InvalidArgument("Hankel dims inconsistent with T");
  const Index p = h.outputs();
  const Index m = h.inputs();
  Matrix big(p * dims.block_rows, m * dims.block_cols);
  for (Index bi = 0; bi < dims.block_rows; ++bi)
    for (Index bj = 0; bj < dims.block_cols; ++bj)
      for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < m; ++j) big(bi * p + i, bj * m + j) = h.coeff(i, j, bi + bj + 1);
  return big;
}

HankelPermutation::HankelPermutation(Index lags, Index outputs, Index inputs, const HankelDims& dims)
    : dims_(dims), lags_(lags), outputs_(outputs), inputs_(inputs) {
  if (dims.block_rows < 1 || dims.block_cols < 1 || dims.block_rows + dims.block_cols - 1 != lags)
    throw InvalidArgument("Hankel dims inconsistent with T");
  const Index rows_h = outputs * dims.block_rows;
  const Index cols_h = inputs * dims.block_cols;
  source_.resize(static_cast<std::size_t>(rows_h * cols_h));
  // vec(H^T) walks H row by row.
  for (Index row = 0; row < rows_h; ++row) {
    const Index bi = row / outputs;
    const Index i = row % outputs;
    for (Index col = 0; col < cols_h; ++col) {
      const Index bj = col / inputs;
      const Index j = col % inputs;
      const Index k = bi + bj + 1;
      source_[static_cast<std::size_t>(row * cols_h + col)] = (i * inputs + j) * lags + (k - 1);
    }
  }
}

Vector HankelPermutation::apply(const Vector& h) const {
  if (h.size() != cols()) throw InvalidArgument("P h: length mismatch");
  Vector out(rows());
  for (Index q = 0; q < rows(); ++q) out[q] = h[source(q)];
  return out;
}

Vector HankelPermutation::adjoint(const Vector& v) const {
  if (v.size() != rows()) throw InvalidArgument("P^T v: length mismatch");
  Vector out = Vector::Zero(cols());
  for (Index q = 0; q < rows(); ++q) out[source(q)] += v[q];
  return out;
}

Matrix HankelPermutation::hankel(const Vector& h) const {
  const Index rows_h = outputs_ * dims_.block_rows;
  const Index cols_h = inputs_ * dims_.block_cols;
  Matrix big(rows_h, cols_h);
  for (Index row = 0; row < rows_h; ++row)
    for (Index col = 0; col < cols_h; ++col) big(row, col) = h[source(row * cols_h + col)];
  return big;
}

Vector HankelPermutation::adjoint_hankel(const Matrix& x) const {
  const Index rows_h = outputs_ * dims_.block_rows;
  const Index cols_h = inputs_ * dims_.block_cols;
  if (x.rows() != rows_h || x.cols() != cols_h) throw InvalidArgument("adjoint_hankel: shape mismatch");
  Vector out = Vector::Zero(cols());
  for (Index row = 0; row < rows_h; ++row)
    for (Index col = 0; col < cols_h; ++col) out[source(row * cols_h + col)] += x(row, col);
  return out;
}

Vector HankelPermutation::multiplicity() const {
  Vector d = Vector::Zero(cols());
  for (Index q = 0; q < rows(); ++q) d[source(q)] += 1.0;
  return d;
}

Eigen::SparseMatrix<double> HankelPermutation::sparse() const {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(source_.size());
  for (Index q = 0; q < rows(); ++q) entries.emplace_back(q, source(q), 1.0);
  Eigen::SparseMatrix<double> p(rows(), cols());
  p.setFromTriplets(entries.begin(), entries.end());
  return p;
}

WeightPair identity_weights(const HankelDims& dims, Index outputs, Index inputs) {
  WeightPair w;
  w.w1 = Matrix::Identity(inputs * dims.block_cols, inputs * dims.block_cols);
  w.w2 = Matrix::Identity(outputs * dims.block_rows, outputs * dims.block_rows);
  w.mode = WeightMode::identity;
  return w;
}

namespace {

Matrix window_covariance(const std::vector<Vector>& windows) {
  const Index dim = windows.front().size();
  const double count = static_cast<double>(windows.size());
  Vector mean = Vector::Zero(dim);
  for (const auto& w : windows) mean += w;
  mean /= count;
  Matrix cov = Matrix::Zero(dim, dim);
  for (const auto& w : windows) {
    const Vector d = w - mean;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= count;
  // A constant channel has zero centred covariance; scale the ridge by raw
  // window power then, so the factorization still succeeds.
  double scale = cov.trace() / static_cast<double>(dim);
  if (!(scale > 0.0)) {
    for (const auto& w : windows) scale += w.squaredNorm();
    scale /= count * static_cast<double>(dim);
  }
  if (!(scale > 0.0)) scale = 1.0;
  const double ridge = 1e-8 * scale;
  cov.diagonal().array() += ridge;
  return cov;
}

// Upper Cholesky factor R with cov = R^T R.
Matrix upper_cholesky(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite(std::string(what) + " covariance is not positive definite");
  return llt.matrixU();
}

}  // namespace

WeightPair build_weights(const Dataset& data, const HankelDims& dims, WeightMode mode) {
  const Index m = data.inputs();
  const Index p = data.outputs();
  if (mode == WeightMode::identity) return identity_weights(dims, p, m);

  const Index n = data.samples();
  const Index r = dims.block_rows;
  const Index c = dims.block_cols;
  if (n - c < 2 || n - r + 1 < 2) throw InsufficientData("too few samples for windowed covariances");

  std::vector<Vector> past;
  for (Index t = c; t < n; ++t) {
    Vector w(m * c);
    for (Index j = 0; j < c; ++j) w.segment(j * m, m) = data.u().row(t - 1 - j).transpose();
    past.push_back(std::move(w));
  }
  std::vector<Vector> future;
  for (Index t = 0; t + r <= n; ++t) {
    Vector w(p * r);
    for (Index i = 0; i < r; ++i) w.segment(i * p, p) = data.y().row(t + i).transpose();
    future.push_back(std::move(w));
  }

  // W2^T whitens the future outputs; W1^T = R_u^T carries the past-input
  // covariance so that W2^T H W1^T = Sigma_y^{-1/2} cov(y+, u-) Sigma_u^{-1/2}.
  const Matrix ru = upper_cholesky(window_covariance(past), "past-input");
  const Matrix ry = upper_cholesky(window_covariance(future), "future-output");

  WeightPair w;
  w.w1 = ru;
  w.w2 = ry.triangularView<Eigen::Upper>().solve(Matrix::Identity(ry.rows(), ry.cols()));
  w.mode = WeightMode::empirical;
  return w;
}

Matrix weighted_hankel(const ImpulseResponse& h, const HankelDims& dims, const WeightPair& w) {
  return w.w2.transpose() * build_hankel(h, dims) * w.w1.transpose();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, std::size_t line_no) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": invalid number '" + s + "'");
  return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file");
  const auto header = split_csv_line(line);
  if (header.empty() || trim(header[0]) != "t") throw ParseError("header must start with column 't'");
  Index m = 0;
  Index p = 0;
  for (std::size_t col = 1; col < header.size(); ++col) {
    const std::string name = trim(header[col]);
    if (p == 0 && name == "u" + std::to_string(m + 1)) {
      ++m;
    } else if (name == "y" + std::to_string(p + 1)) {
      ++p;
    } else {
      throw ParseError("unexpected header column '" + name + "'");
    }
  }
  if (m < 1 || p < 1) throw ParseError("header must name at least one input and one output");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns, got " + std::to_string(fields.size()));
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t col = 1; col < fields.size(); ++col) values.push_back(parse_number(fields[col], line_no));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("dataset has no samples");

  const Index n = static_cast<Index>(rows.size());
  Matrix u(n, m);
  Matrix y(n, p);
  for (Index t = 0; t < n; ++t) {
    const auto& row = rows[static_cast<std::size_t>(t)];
    for (Index j = 0; j < m; ++j) u(t, j) = row[static_cast<std::size_t>(j)];
    for (Index i = 0; i < p; ++i) y(t, i) = row[static_cast<std::size_t>(m + i)];
  }
  return Dataset(std::move(u), std::move(y));
}

Dataset read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path);
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "t";
  for (Index j = 0; j < data.inputs(); ++j) out << ",u" << (j + 1);
  for (Index i = 0; i < data.outputs(); ++i) out << ",y" << (i + 1);
  out << "\n";
  out.precision(17);
  for (Index t = 0; t < data.samples(); ++t) {
    out << (t + 1);
    for (Index j = 0; j < data.inputs(); ++j) out << "," << data.u()(t, j);
    for (Index i = 0; i < data.outputs(); ++i) out << "," << data.y()(t, i);
    out << "\n";
  }
}

}  // namespace hankelid
