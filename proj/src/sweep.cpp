#include "sil/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "sil/csv.hpp"
#include "sil/oracle.hpp"
#include "sil/rng.hpp"

namespace sil {
namespace {

std::vector<std::string> split_list(const std::string& raw) {
  std::string body = trim(raw);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw std::invalid_argument("unterminated array: " + raw);
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(body);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("empty value list: " + raw);
  return out;
}

template <typename T, typename F>
std::vector<T> convert(const std::string& raw, F f) {
  std::vector<T> out;
  for (const auto& item : split_list(raw)) out.push_back(f(item));
  return out;
}

int to_int(const std::string& s) { return static_cast<int>(parse_int(s)); }
double to_double(const std::string& s) { return parse_double(s); }
std::uint64_t to_u64(const std::string& s) { return static_cast<std::uint64_t>(std::stoull(s)); }

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string coordinates(const GridPoint& p) {
  std::ostringstream ss;
  ss << "d=" << p.d << ";n=" << p.n << ";M=" << p.M << ";s=" << p.s << ";q=" << format_double(p.q)
     << ";alpha=" << format_double(p.alpha) << ";link=" << p.link << ";mode=" << p.mode;
  return ss.str();
}

int link_degree(const std::string& link) {
  if (link.size() == 3 && link.rfind("he", 0) == 0 && link[2] >= '1' && link[2] <= '9') {
    return link[2] - '0';
  }
  if (link == "cancel" || link == "noise") return 2;
  throw std::invalid_argument("unknown link '" + link + "' (he1..he9, cancel, noise)");
}

std::string sanitize(std::string text) {
  for (char& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return text;
}

}  // namespace

SweepSpec parse_sweep_config(std::istream& in) {
  SweepSpec spec;
  std::string line;
  std::uint64_t seed_base = 0;
  int seed_count = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "d") spec.d = convert<int>(value, to_int);
    else if (key == "n") spec.n = convert<int>(value, to_int);
    else if (key == "M") spec.M = convert<int>(value, to_int);
    else if (key == "s") spec.s = convert<int>(value, to_int);
    else if (key == "q") spec.q = convert<double>(value, to_double);
    else if (key == "alpha") spec.alpha = convert<double>(value, to_double);
    else if (key == "link") spec.link = split_list(value);
    else if (key == "mode") spec.mode = split_list(value);
    else if (key == "seeds") spec.seeds = convert<std::uint64_t>(value, to_u64);
    else if (key == "seed_base") seed_base = to_u64(value);
    else if (key == "seed_count") seed_count = to_int(value);
    else if (key == "m") spec.m = to_int(value);
    else if (key == "r") spec.r = to_int(value);
    else if (key == "c") spec.c = to_double(value);
    else if (key == "delta") spec.delta = to_double(value);
    else if (key == "kappa") spec.kappa = to_double(value);
    else if (key == "n_test") spec.n_test = to_int(value);
    else if (key == "lambda_t") spec.lambda_t = to_double(value);
    else if (key == "T_max") spec.T_max = to_int(value);
    else if (key == "grad_tol") spec.grad_tol = to_double(value);
    else if (key == "prune_bias") {
      if (value == "gaussian") spec.prune_bias = BiasInit::gaussian;
      else if (value == "zero") spec.prune_bias = BiasInit::zero;
      else throw std::invalid_argument("prune_bias must be gaussian or zero");
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (seed_count >= 0) {
    spec.seeds.clear();
    for (int k = 0; k < seed_count; ++k) spec.seeds.push_back(seed_base + static_cast<std::uint64_t>(k));
  }
  return spec;
}

SweepSpec parse_sweep_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_sweep_config(in);
}

std::string task_id(const GridPoint& p) {
  return coordinates(p) + ";seed=" + std::to_string(p.seed) + ";arm=" + p.arm;
}

std::uint64_t record_seed(const GridPoint& p) { return derive_seed(p.seed, {fnv1a(coordinates(p))}); }

IndexModel build_model(const SweepSpec& spec, const GridPoint& p, int& s_used, int& r_used) {
  if (p.d < 2) throw std::invalid_argument("d must be >= 2");
  s_used = p.s > 0 ? p.s
                   : std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(p.d), p.alpha))));
  const int k = link_degree(p.link);
  const std::uint64_t seed = derive_seed(record_seed(p), {1});
  const LinkSpec zero = LinkSpec::from_hermite({0.0});
  if (p.mode == "single") {
    r_used = 1;
    if (p.link == "cancel") {
      IndexModel model = make_cancellation_model(p.d, s_used, desk_epsilon(s_used));
      model.noise_delta = spec.delta;
      return model;
    }
    const Matrix V = make_sparse_frame(p.d, 1, s_used, seed);
    if (p.link == "noise") return make_single_index(V.col(0), zero, spec.delta);
    IndexModel model = make_additive_hermite(V, k, spec.delta);
    return model;
  }
  if (p.mode == "multi") {
    r_used = spec.r;
    if (p.link == "cancel") throw std::invalid_argument("the cancel link is single-index only");
    const Matrix V = make_sparse_frame(p.d, r_used, s_used, seed);
    if (p.link == "noise") {
      IndexModel model;
      model.V = V;
      model.links.assign(static_cast<std::size_t>(r_used), zero);
      model.noise_delta = spec.delta;
      validate(model);
      return model;
    }
    return make_additive_hermite(V, k, spec.delta);
  }
  throw std::invalid_argument("mode must be single or multi");
}

std::vector<GridPoint> enumerate_tasks(const SweepSpec& spec, bool compare) {
  std::vector<GridPoint> out;
  for (int d : spec.d)
    for (int n : spec.n)
      for (int M : spec.M)
        for (int s : spec.s)
          for (double q : spec.q)
            for (double alpha : spec.alpha)
              for (const auto& link : spec.link)
                for (const auto& mode : spec.mode)
                  for (std::uint64_t seed : spec.seeds) {
                    GridPoint p{d, n, M, s, q, alpha, link, mode, seed, "pruned"};
                    out.push_back(p);
                    if (compare) {
                      p.arm = "unpruned";
                      out.push_back(p);
                    }
                  }
  if (out.empty()) throw std::invalid_argument("empty sweep grid");
  return out;
}

TaskSetup prepare_task(const SweepSpec& spec, const GridPoint& p) {
  TaskSetup t;
  int s_used = 0;
  int r_used = 1;
  t.model = build_model(spec, p, s_used, r_used);
  t.r = r_used;
  t.seed = record_seed(p);
  const Dataset raw = sample_dataset(t.model, p.n, derive_seed(t.seed, {2}));
  t.data = augment(raw, derive_seed(t.seed, {3}));

  TrainConfig& cfg = t.cfg;
  cfg.M = p.M > 0 ? p.M : s_used * r_used;
  cfg.c = spec.c > 0.0 ? spec.c : 1.0 / std::log(static_cast<double>(t.data.dim()));
  cfg.m = spec.m;
  cfg.mode = p.mode == "multi" ? TrainMode::multi : TrainMode::single;
  cfg.seed = derive_seed(t.seed, {4});
  cfg.kappa = spec.kappa;
  cfg.info_exponent = link_degree(p.link);
  cfg.lambda_t = spec.lambda_t;
  cfg.T_max = spec.T_max;
  cfg.grad_tol = spec.grad_tol;
  cfg.prune_bias = spec.prune_bias;
  cfg.full_support = p.arm == "unpruned";
  return t;
}

bool objective_monotone(const std::vector<double>& objective) {
  for (std::size_t t = 1; t < objective.size(); ++t) {
    if (objective[t] > objective[t - 1] + 1e-12 * std::abs(objective[t - 1])) return false;
  }
  return true;
}

ResultRecord run_task(const SweepSpec& spec, const GridPoint& p) {
  ResultRecord rec;
  rec.point = p;
  rec.task_id = task_id(p);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TaskSetup t = prepare_task(spec, p);
    rec.r = t.r;
    const FitResult fitted = fit_detailed(t.data, t.cfg);
    rec.support_size = fitted.predictor.J.size();
    rec.support_residual = support_residual(t.model.V, fitted.predictor.J.indices);
    rec.soft_sparsity = soft_sparsity(t.model.V, p.q);
    rec.excess_risk = excess_risk(fitted.predictor, t.model, spec.n_test, derive_seed(t.seed, {5}));
    rec.objective_monotone = objective_monotone(fitted.second.objective);
    rec.solver_converged = fitted.second.converged;
  } catch (const std::exception& e) {
    rec.error = sanitize(e.what());
    if (rec.error.empty()) rec.error = "error";
    rec.support_residual = std::numeric_limits<double>::quiet_NaN();
    rec.excess_risk = std::numeric_limits<double>::quiet_NaN();
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

std::string result_csv_header() {
  return "task_id,arm,d,n,M,s,r,q,alpha,link,mode,seed,support_size,soft_sparsity,"
         "support_residual,excess_risk,wall_time_ms,error";
}

std::string result_csv_row(const ResultRecord& r) {
  const GridPoint& p = r.point;
  std::ostringstream ss;
  ss << r.task_id << ',' << p.arm << ',' << p.d << ',' << p.n << ',' << p.M << ',' << p.s << ','
     << r.r << ',' << format_double(p.q) << ',' << format_double(p.alpha) << ',' << p.link << ','
     << p.mode << ',' << p.seed << ',' << r.support_size << ',' << format_double(r.soft_sparsity)
     << ',' << format_double(r.support_residual) << ',' << format_double(r.excess_risk) << ','
     << std::llround(r.wall_time_ms) << ',' << r.error;
  return ss.str();
}

std::vector<ResultRecord> read_results_csv(const std::string& path) {
  std::vector<ResultRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  if (!std::getline(in, line) || trim(line) != result_csv_header()) return out;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no newline: torn write
    const auto f = split_csv_line(line);
    if (f.size() != 18) continue;
    try {
      ResultRecord r;
      r.task_id = f[0];
      r.point.arm = f[1];
      r.point.d = static_cast<int>(parse_int(f[2]));
      r.point.n = static_cast<int>(parse_int(f[3]));
      r.point.M = static_cast<int>(parse_int(f[4]));
      r.point.s = static_cast<int>(parse_int(f[5]));
      r.r = static_cast<int>(parse_int(f[6]));
      r.point.q = parse_double(f[7]);
      r.point.alpha = parse_double(f[8]);
      r.point.link = f[9];
      r.point.mode = f[10];
      r.point.seed = to_u64(f[11]);
      r.support_size = parse_int(f[12]);
      r.soft_sparsity = parse_double(f[13]);
      r.support_residual = parse_double(f[14]);
      r.excess_risk = parse_double(f[15]);
      r.wall_time_ms = parse_double(f[16]);
      r.error = f[17];
      if (r.task_id != task_id(r.point)) continue;
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      continue;
    }
  }
  return out;
}

namespace {

void write_records_atomically(const std::string& path, const std::vector<ResultRecord>& records) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << result_csv_header() << '\n';
    for (const auto& r : records) out << result_csv_row(r) << '\n';
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::vector<ResultRecord> run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
  const std::vector<GridPoint> tasks = enumerate_tasks(spec, opts.compare);
  std::unordered_map<std::string, std::size_t> order;
  for (std::size_t k = 0; k < tasks.size(); ++k) order.emplace(task_id(tasks[k]), k);

  std::vector<ResultRecord> done;
  if (opts.resume && !opts.out.empty()) {
    for (auto& r : read_results_csv(opts.out)) {
      if (order.count(r.task_id) != 0) done.push_back(std::move(r));
    }
  }
  std::unordered_map<std::string, bool> finished;
  for (const auto& r : done) finished[r.task_id] = true;

  std::ofstream sink;
  if (!opts.out.empty()) {
    const auto parent = std::filesystem::path(opts.out).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    // kept rows go through a temp file so a crash here loses nothing
    write_records_atomically(opts.out, done);
    sink.open(opts.out, std::ios::app);
    if (!sink) throw std::runtime_error("cannot open " + opts.out);
  }

  std::vector<const GridPoint*> pending;
  for (const auto& t : tasks) {
    if (!finished.count(task_id(t))) pending.push_back(&t);
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      ResultRecord rec = run_task(spec, *pending[k]);
      std::lock_guard<std::mutex> lock(mu);
      if (sink.is_open()) {
        sink << result_csv_row(rec) << '\n';
        sink.flush();
      }
      done.push_back(std::move(rec));
    }
  };
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(pending.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::sort(done.begin(), done.end(), [&order](const ResultRecord& x, const ResultRecord& y) {
    return order.at(x.task_id) < order.at(y.task_id);
  });
  if (sink.is_open()) {
    sink.close();
    write_records_atomically(opts.out, done);
  }
  return done;
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size() / 2;
  return values.size() % 2 == 1 ? values[k] : 0.5 * (values[k - 1] + values[k]);
}

}  // namespace sil
