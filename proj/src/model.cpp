#include "sil/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

#include "sil/csv.hpp"
#include "sil/rng.hpp"

namespace sil {

double IndexModel::response(const Eigen::Ref<const Vector>& x) const {
  double y = 0.0;
  for (Index j = 0; j < V.cols(); ++j) y += links[j](V.col(j).dot(x));
  return y;
}

void validate(const IndexModel& model) {
  const Index d = model.V.rows();
  const Index r = model.V.cols();
  if (r < 1 || r > d) throw std::invalid_argument("index model needs 1 <= r <= d");
  if (static_cast<Index>(model.links.size()) != r) {
    throw std::invalid_argument("index model needs one link per direction");
  }
  if (!(model.noise_delta >= 0.0)) throw std::invalid_argument("noise level must be non-negative");
  const Matrix gram = model.V.transpose() * model.V - Matrix::Identity(r, r);
  if (gram.cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("direction matrix must have orthonormal columns");
  }
}

IndexModel make_single_index(const Vector& v, LinkSpec link, double noise_delta) {
  IndexModel model;
  model.V = v;
  model.links.push_back(std::move(link));
  model.noise_delta = noise_delta;
  validate(model);
  return model;
}

IndexModel make_additive_hermite(const Matrix& V, int k, double noise_delta) {
  IndexModel model;
  model.V = V;
  const double r = static_cast<double>(V.cols());
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  const LinkSpec term = LinkSpec::hermite_term(k, 1.0 / std::sqrt(r * kfact));
  model.links.assign(static_cast<std::size_t>(V.cols()), term);
  model.noise_delta = noise_delta;
  validate(model);
  return model;
}

Vector make_sparse_direction(int d, int s, DirectionProfile profile) {
  if (s < 1 || s > d) throw std::invalid_argument("sparse direction needs 1 <= s <= d");
  Vector v = Vector::Zero(d);
  if (profile.kind == DirectionProfile::Kind::flat) {
    v.head(s).setConstant(1.0 / std::sqrt(static_cast<double>(s)));
    return v;
  }
  const double eps = profile.eps;
  if (!(eps > 0.0) || !(eps < 1.0 / std::sqrt(static_cast<double>(s)))) {
    throw std::invalid_argument("dominated profile needs 0 < eps < s^{-1/2}");
  }
  v[0] = std::sqrt(1.0 - (s - 1) * eps * eps);
  for (int i = 1; i < s; ++i) v[i] = eps;
  return v;
}

Matrix make_sparse_frame(int d, int r, int s, std::uint64_t seed) {
  if (r < 1 || s < 1 || static_cast<long long>(r) * s > d) {
    throw std::invalid_argument("sparse frame needs r*s <= d");
  }
  const int block = d / r;
  const double value = 1.0 / std::sqrt(static_cast<double>(s));
  Matrix V = Matrix::Zero(d, r);
  for (int j = 0; j < r; ++j) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(j)}));
    std::vector<int> pos(block);
    std::iota(pos.begin(), pos.end(), 0);
    for (int i = 0; i < s; ++i) {
      const auto pick = i + static_cast<int>(rng.next() % static_cast<std::uint64_t>(block - i));
      std::swap(pos[i], pos[pick]);
    }
    for (int i = 0; i < s; ++i) V(j * block + pos[i], j) = value;
  }
  return V;
}

double soft_sparsity(const Matrix& V, double q) {
  if (!(q >= 0.0) || q >= 2.0) throw std::invalid_argument("soft sparsity needs q in [0,2)");
  double total = 0.0;
  for (Index i = 0; i < V.rows(); ++i) {
    const double norm = V.row(i).norm();
    if (q == 0.0) {
      total += norm > 0.0 ? 1.0 : 0.0;
    } else if (norm > 0.0) {
      total += std::pow(norm, q);
    }
  }
  return total;
}

double support_residual(const Matrix& V, const std::vector<int>& support) {
  std::vector<char> keep(static_cast<std::size_t>(V.rows()), 0);
  for (int i : support) {
    if (i >= 0 && i < V.rows()) keep[i] = 1;
  }
  double acc = 0.0;
  for (Index i = 0; i < V.rows(); ++i) {
    if (!keep[i]) acc += V.row(i).squaredNorm();
  }
  return acc;
}

Dataset sample_dataset(const IndexModel& model, Index n, std::uint64_t seed) {
  validate(model);
  if (n < 1) throw std::invalid_argument("dataset needs n >= 1");
  const Index d = model.dim();
  Rng rng(seed);
  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  data.seed = seed;
  const double noise_scale = std::sqrt(model.noise_delta);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < d; ++l) data.X(i, l) = rng.normal();
    const double eps = rng.normal();
    data.y[i] = noise_scale * eps;
  }
  const Matrix Z = data.X * model.V;
  for (Index i = 0; i < n; ++i) {
    double clean = 0.0;
    for (Index j = 0; j < model.rank(); ++j) clean += model.links[j](Z(i, j));
    data.y[i] += clean;
  }
  return data;
}

Dataset augment(const Dataset& data, std::uint64_t seed) {
  if (data.augmented) throw std::logic_error("dataset is already augmented");
  Dataset out;
  out.X.resize(data.X.rows(), data.X.cols() + 1);
  out.X.leftCols(data.X.cols()) = data.X;
  Rng rng(seed);
  for (Index i = 0; i < data.X.rows(); ++i) out.X(i, data.X.cols()) = rng.normal();
  out.y = data.y;
  out.augmented = true;
  out.seed = data.seed;
  return out;
}

FullRankCheck check_assumption_full_rank(const std::vector<LinkSpec>& links, Index mc_samples,
                                         std::uint64_t seed, double tol) {
  const Index r = static_cast<Index>(links.size());
  if (r < 1) throw std::invalid_argument("full-rank check needs at least one link");
  if (mc_samples < 1) throw std::invalid_argument("full-rank check needs mc_samples >= 1");
  Rng rng(seed);
  Matrix acc = Matrix::Zero(r, r);
  Vector z(r);
  for (Index s = 0; s < mc_samples; ++s) {
    double sigma = 0.0;
    for (Index j = 0; j < r; ++j) {
      z[j] = rng.normal();
      sigma += links[j](z[j]);
    }
    acc.noalias() += sigma * z * z.transpose();
  }
  FullRankCheck out;
  out.D = acc / static_cast<double>(mc_samples);
  Eigen::JacobiSVD<Matrix> svd(out.D);
  out.min_singular_value = svd.singularValues()[r - 1];
  out.full_rank = out.min_singular_value > tol;
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const Index d = data.dim();
  for (Index l = 0; l < d; ++l) out << "x_" << (l + 1) << ',';
  out << "y\n";
  for (Index i = 0; i < data.size(); ++i) {
    for (Index l = 0; l < d; ++l) out << format_double(data.X(i, l)) << ',';
    out << format_double(data.y[i]) << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_dataset_csv(out, data);
}

Dataset read_dataset_csv(std::istream& in, bool augmented) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || trim(header.back()) != "y") {
    throw std::invalid_argument("dataset CSV header must be x_1,...,x_d,y");
  }
  const Index d = static_cast<Index>(header.size()) - 1;
  for (Index l = 0; l < d; ++l) {
    if (trim(header[l]) != "x_" + std::to_string(l + 1)) {
      throw std::invalid_argument("dataset CSV header must be x_1,...,x_d,y");
    }
  }
  std::vector<double> values;
  Index n = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<Index>(fields.size()) != d + 1) {
      throw std::invalid_argument("dataset CSV row " + std::to_string(n + 1) + " has wrong width");
    }
    for (const auto& f : fields) values.push_back(parse_double(f));
    ++n;
  }
  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < d; ++l) data.X(i, l) = values[i * (d + 1) + l];
    data.y[i] = values[i * (d + 1) + d];
  }
  data.augmented = augmented;
  return data;
}

Dataset read_dataset_csv(const std::string& path, bool augmented) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(in, augmented);
}

}  // namespace sil
