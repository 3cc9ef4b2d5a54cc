#include "sil/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sil/csv.hpp"
#include "sil/network.hpp"

namespace sil {
namespace {

std::vector<int> top_m_positions(const Vector& v, Index M) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  const Index keep = std::min<Index>(std::max<Index>(M, 0), v.size());
  auto before = [&v](int p, int q) {
    const double ap = std::abs(v[p]);
    const double aq = std::abs(v[q]);
    if (ap != aq) return ap > aq;
    return p < q;
  };
  if (keep < v.size()) {
    std::nth_element(idx.begin(), idx.begin() + keep, idx.end(), before);
  }
  idx.resize(static_cast<std::size_t>(keep));
  std::sort(idx.begin(), idx.end(), before);
  return idx;
}

Vector probe_projection(const Dataset& data, int i, double c) {
  const Index d = data.dim();
  if (i == d - 1) return data.X.col(d - 1);
  return c * data.X.col(i) + std::sqrt(1.0 - c * c) * data.X.col(d - 1);
}

}  // namespace

Vector shifted_basis(int i, Index d, double c) {
  if (d < 1 || i < 0 || i >= d) throw std::invalid_argument("shifted basis index out of range");
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("shift needs 0 < c <= 1");
  Vector e = Vector::Zero(d);
  if (i == d - 1) {
    e[d - 1] = 1.0;
  } else {
    e[i] = c;
    e[d - 1] = std::sqrt(1.0 - c * c);
  }
  return e;
}

Vector top_m(const Vector& v, Index M) {
  Vector out = Vector::Zero(v.size());
  for (int p : top_m_positions(v, M)) out[p] = v[p];
  return out;
}

double top_m_norm_sq(const Vector& v, Index M) {
  double acc = 0.0;
  for (int p : top_m_positions(v, M)) acc += v[p] * v[p];
  return acc;
}

std::vector<int> rank_descending(const Vector& scores) {
  std::vector<int> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&scores](int p, int q) { return scores[p] > scores[q]; });
  return idx;
}

bool SupportSet::contains(int i) const {
  return std::binary_search(indices.begin(), indices.end(), i);
}

void SupportSet::add(int i, unsigned source) {
  const auto it = std::lower_bound(indices.begin(), indices.end(), i);
  const auto pos = it - indices.begin();
  if (it != indices.end() && *it == i) {
    sources[pos] |= source;
    return;
  }
  indices.insert(it, i);
  sources.insert(sources.begin() + pos, source);
}

SupportSet SupportSet::full(Index d) {
  SupportSet J;
  J.indices.resize(static_cast<std::size_t>(d));
  std::iota(J.indices.begin(), J.indices.end(), 0);
  J.sources.assign(static_cast<std::size_t>(d), 0u);
  return J;
}

void validate(const PruneConfig& cfg, Index d) {
  if (cfg.m < 1) throw std::invalid_argument("pruning needs m >= 1");
  if (cfg.M < 1 || cfg.M > d) throw std::invalid_argument("pruning needs 1 <= M <= d");
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) throw std::invalid_argument("pruning needs 0 < c < 1");
  if (cfg.line3_probe < -1 || cfg.line3_probe >= d) {
    throw std::invalid_argument("line-3 probe out of range");
  }
}

void prune_initialization(const PruneConfig& cfg, Vector& a, Vector& b) {
  draw_symmetric_output_and_bias(cfg.m, cfg.seed, a, b);
  if (cfg.bias_init == BiasInit::zero) b.setZero();
}

SupportSet prune_network(const Dataset& data, const PruneConfig& cfg, PruneTrace* trace) {
  if (!data.augmented) throw std::invalid_argument("pruning requires augmented data");
  const Index d = data.dim();
  validate(cfg, d);
  Vector a;
  Vector b;
  prune_initialization(cfg, a, b);

  Vector plus_norms(d);
  Vector minus_norms(d);
  for (int i = 0; i < d; ++i) {
    const SharedDirectionGradients g =
        shared_direction_gradients(data, a, probe_projection(data, i, cfg.c), b);
    double p = 0.0;
    double q = 0.0;
    for (Index j = 0; j < g.plus.rows(); ++j) {
      p += top_m_norm_sq(g.plus.row(j).transpose(), cfg.M);
      q += top_m_norm_sq(g.minus.row(j).transpose(), cfg.M);
    }
    plus_norms[i] = p;
    minus_norms[i] = q;
  }

  SupportSet J;
  PruneTrace local;
  const int probe = cfg.line3_probe < 0 ? static_cast<int>(d - 1) : cfg.line3_probe;
  for (int j = 0; j < cfg.m; ++j) {
    if (b[j] >= 0.0) {
      local.line3_neuron = j;
      break;
    }
  }
  if (local.line3_neuron >= 0) {
    const SharedDirectionGradients g =
        shared_direction_gradients(data, a, probe_projection(data, probe, cfg.c), b);
    const Vector row = g.minus.row(local.line3_neuron).transpose();
    for (int p : top_m_positions(row, cfg.M)) {
      if (row[p] != 0.0) local.line3.push_back(p);
    }
    std::sort(local.line3.begin(), local.line3.end());
  }
  for (int p : local.line3) J.add(p, kLine3);

  const std::vector<int> by_plus = rank_descending(plus_norms);
  const std::vector<int> by_minus = rank_descending(minus_norms);
  local.even_top.assign(by_plus.begin(), by_plus.begin() + cfg.M);
  local.odd_top.assign(by_minus.begin(), by_minus.begin() + cfg.M);
  for (int p : local.even_top) J.add(p, kEvenTopM);
  for (int p : local.odd_top) J.add(p, kOddTopM);

  if (trace != nullptr) {
    local.a0 = a;
    local.b0 = b;
    local.plus_norms = plus_norms;
    local.minus_norms = minus_norms;
    *trace = std::move(local);
  }
  return J;
}

Vector raw_gradient_norms(const Dataset& data, const PruneConfig& cfg) {
  if (!data.augmented) throw std::invalid_argument("pruning requires augmented data");
  const Index d = data.dim();
  validate(cfg, d);
  Vector a;
  Vector b;
  prune_initialization(cfg, a, b);
  Vector norms(d);
  for (int i = 0; i < d; ++i) {
    const Matrix g = shared_direction_gradients(data, a, data.X.col(i), b).full();
    norms[i] = g.squaredNorm();
  }
  return norms;
}

std::string source_tags(unsigned mask) {
  std::string out;
  auto append = [&out](const char* tag) {
    if (!out.empty()) out += ',';
    out += tag;
  };
  if (mask & kLine3) append("line3");
  if (mask & kEvenTopM) append("even_topM");
  if (mask & kOddTopM) append("odd_topM");
  if (out.empty()) out = "forced";
  return out;
}

void write_support(std::ostream& out, const SupportSet& J) {
  out << "# support size=" << J.size() << '\n';
  for (std::size_t k = 0; k < J.indices.size(); ++k) {
    out << J.indices[k] << " # source=" << source_tags(J.sources[k]) << '\n';
  }
}

void write_support(const std::string& path, const SupportSet& J) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_support(out, J);
}

SupportSet read_support(std::istream& in) {
  SupportSet J;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    unsigned mask = 0;
    if (hash != std::string::npos) {
      const std::string comment = line.substr(hash);
      if (comment.find("line3") != std::string::npos) mask |= kLine3;
      if (comment.find("even_topM") != std::string::npos) mask |= kEvenTopM;
      if (comment.find("odd_topM") != std::string::npos) mask |= kOddTopM;
    }
    const long long i = parse_int(body);
    if (i < 0) throw std::invalid_argument("negative support index");
    J.add(static_cast<int>(i), mask);
  }
  return J;
}

SupportSet read_support(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_support(in);
}

}  // namespace sil
