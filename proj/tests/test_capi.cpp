#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sil/sil.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sil_capi_test";
  fs::create_directories(dir);
  return dir / name;
}

sil_model* make_model(int d, int s, const char* link, const char* mode, double delta, uint64_t seed) {
  sil_model_params p;
  sil_model_params_default(&p);
  p.d = d;
  p.s = s;
  p.link = link;
  p.mode = mode;
  p.delta = delta;
  p.seed = seed;
  sil_model* m = nullptr;
  EXPECT_EQ(sil_model_create(&p, &m), SIL_OK) << sil_last_error();
  return m;
}

int run(const std::string& args, std::string* out = nullptr) {
  const fs::path log = scratch("cli.out");
  const std::string cmd = std::string(SIL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out != nullptr) {
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(CApi, Version) { EXPECT_STRNE(sil_version(), ""); }

TEST(CApi, InvalidArgumentsReportStatus) {
  sil_model_params p;
  sil_model_params_default(&p);
  p.d = 8;
  p.s = 2;
  p.link = "he42";
  sil_model* m = nullptr;
  EXPECT_EQ(sil_model_create(&p, &m), SIL_ERR_INVALID);
  EXPECT_EQ(m, nullptr);
  EXPECT_STRNE(sil_last_error(), "");
  EXPECT_EQ(sil_model_create(nullptr, &m), SIL_ERR_INVALID);
  sil_dataset* data = nullptr;
  EXPECT_EQ(sil_dataset_read_csv(scratch("missing.csv").c_str(), 0, &data), SIL_ERR_IO);
}

TEST(CApi, PruneTrainPredictRoundTrip) {
  sil_model* model = make_model(24, 3, "he2", "single", 0.1, 1);
  int d = 0, r = 0;
  ASSERT_EQ(sil_model_shape(model, &d, &r), SIL_OK);
  EXPECT_EQ(d, 24);
  EXPECT_EQ(r, 1);

  sil_dataset *raw = nullptr, *data = nullptr;
  ASSERT_EQ(sil_dataset_sample(model, 800, 2, &raw), SIL_OK);
  ASSERT_EQ(sil_dataset_augment(raw, 3, &data), SIL_OK);
  sil_support* J = nullptr;
  sil_prune_config pc;
  sil_prune_config_default(&pc);
  EXPECT_EQ(sil_prune(raw, &pc, &J), SIL_ERR_INVALID);  // not augmented
  pc.M = 3;
  ASSERT_EQ(sil_prune(data, &pc, &J), SIL_OK) << sil_last_error();
  int size = 0;
  sil_support_size(J, &size);
  EXPECT_GE(size, 1);
  EXPECT_LE(size, 9);
  std::vector<int> idx(size);
  ASSERT_EQ(sil_support_indices(J, idx.data(), size), SIL_OK);
  double res = -1;
  ASSERT_EQ(sil_support_residual(model, J, &res), SIL_OK);
  EXPECT_GE(res, 0.0);
  EXPECT_LE(res, 1.0);
  const fs::path jp = scratch("J.txt");
  ASSERT_EQ(sil_support_write(J, jp.c_str()), SIL_OK);
  sil_support* J2 = nullptr;
  ASSERT_EQ(sil_support_read(jp.c_str(), &J2), SIL_OK);
  int size2 = 0;
  sil_support_size(J2, &size2);
  EXPECT_EQ(size2, size);

  sil_train_config tc;
  sil_train_config_default(&tc);
  tc.M = 3;
  tc.m = 8;
  sil_predictor* p = nullptr;
  ASSERT_EQ(sil_train(data, &tc, &p), SIL_OK) << sil_last_error();
  double risk = -1;
  ASSERT_EQ(sil_predictor_excess_risk(p, model, 1000, 4, &risk), SIL_OK);
  EXPECT_TRUE(std::isfinite(risk));
  const fs::path pp = scratch("pred.txt");
  ASSERT_EQ(sil_predictor_write(p, pp.c_str()), SIL_OK);
  sil_predictor* q = nullptr;
  ASSERT_EQ(sil_predictor_read(pp.c_str(), &q), SIL_OK);
  std::vector<double> x(25, 0.3);
  double y1 = 0, y2 = 0;
  ASSERT_EQ(sil_predictor_predict(p, x.data(), 25, &y1), SIL_OK);
  ASSERT_EQ(sil_predictor_predict(q, x.data(), 25, &y2), SIL_OK);
  EXPECT_EQ(y1, y2);
  EXPECT_EQ(sil_predictor_predict(p, x.data(), 24, &y1), SIL_ERR_INVALID);

  sil_predictor_free(q);
  sil_predictor_free(p);
  sil_support_free(J2);
  sil_support_free(J);
  sil_dataset_free(data);
  sil_dataset_free(raw);
  sil_model_free(model);
}

TEST(CApi, PackingShortfallIsPartial) {
  sil_packing* p = nullptr;
  EXPECT_EQ(sil_packing_build(16, 1, 4, 40, 2, 1e-3, 500, 2, &p), SIL_ERR_PARTIAL);
  ASSERT_NE(p, nullptr);
  int frames = 0, complete = 1;
  sil_packing_info(p, &frames, nullptr, nullptr, nullptr, nullptr, &complete);
  EXPECT_LT(frames, 40);
  EXPECT_EQ(complete, 0);
  sil_packing_free(p);
}

TEST(CApi, TauBound) {
  double t = 0;
  ASSERT_EQ(sil_csq_tau_bound(1e4, 0.5, 2, &t), SIL_OK);
  EXPECT_NEAR(t, 1e-2, 1e-15);
}

TEST(CApi, SweepAndPlot) {
  const fs::path out = scratch("sweep.csv");
  fs::remove(out);
  sil_sweep_options o{out.c_str(), 1, 0, 1};
  int records = 0, failed = 0;
  ASSERT_EQ(sil_sweep_run("d=16\nn=200\ns=2\nm=4\nseeds=[0,1]\nn_test=200\n", &o, &records, &failed), SIL_OK)
      << sil_last_error();
  EXPECT_EQ(records, 4);
  EXPECT_EQ(failed, 0);
  char warn[256];
  EXPECT_EQ(sil_plot(out.c_str(), "risk_vs_n", scratch("r.svg").c_str(), warn, sizeof warn), SIL_OK);
  EXPECT_EQ(sil_plot(out.c_str(), "pie", scratch("r.svg").c_str(), warn, sizeof warn), SIL_ERR_INVALID);
  EXPECT_EQ(sil_sweep_run("d=\n", &o, &records, &failed), SIL_ERR_INVALID);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("");
  std::string out;
  EXPECT_EQ(run("gen --d 8 --s 2 --n 20 --seed 1 --out " + (dir / "g.csv").string(), &out), 0) << out;
  EXPECT_EQ(out.rfind("path,n,d,augmented\n", 0), 0u) << out;
  EXPECT_EQ(run("prune --d 16 --s 2 --n 300 --m 4 --seed 1 --out " + (dir / "J.txt").string(), &out), 0) << out;
  EXPECT_EQ(run("prune --data " + (dir / "g.csv").string() + " --M 2 --m 4 --out " + (dir / "J2.txt").string(), &out),
            0)
      << out;
  EXPECT_EQ(run("train --d 16 --s 2 --n 300 --m 4 --seed 1 --kappa 2 --out " + (dir / "p.txt").string(), &out), 0)
      << out;
  EXPECT_EQ(run("sweep --d 16 --n 200 --s 2 --m 4 --seed 0,1 --jobs 2 --out " + (dir / "s.csv").string(), &out), 0)
      << out;
  EXPECT_EQ(run("sweep --d 16 --n 200 --s 2 --m 4 --seed 0,1 --resume --out " + (dir / "s.csv").string(), &out), 0)
      << out;
  EXPECT_EQ(run("compare --d 16 --n 200 --s 2 --m 4 --seed 0 --out " + (dir / "c.csv").string(), &out), 0) << out;
  EXPECT_EQ(run("plot --in " + (dir / "s.csv").string() + " --kind residual_vs_n --out " + (dir / "s.svg").string(),
                &out),
            0)
      << out;
  EXPECT_EQ(run("csq-pack --d 256 --r 2 --s 16 --n 5 --out " + (dir / "pk").string(), &out), 0) << out;
  EXPECT_EQ(run("csq-pack --d 16 --r 1 --s 4 --n 40 --cap 0.001 --attempts 500 --out " + (dir / "pk2").string(), &out),
            3)
      << out;
  EXPECT_EQ(run("", &out), 1);
  EXPECT_EQ(run("gen --d -2 --out x.csv", &out), 1);
  EXPECT_EQ(run("prune --link he99 --out x.txt", &out), 1);
  EXPECT_EQ(run("plot --in " + (dir / "nope.csv").string() + " --out x.svg", &out), 1);
}

TEST(Cli, SweepMatchesAcrossJobs) {
  const fs::path dir = scratch("");
  const std::string grid = "sweep --d 16,20 --n 200 --s 2 --m 4 --seed 0,1 ";
  ASSERT_EQ(run(grid + "--jobs 1 --out " + (dir / "j1.csv").string()), 0);
  ASSERT_EQ(run(grid + "--jobs 2 --out " + (dir / "j2.csv").string()), 0);
  auto strip = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line, all;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string cell;
      int k = 0;
      while (std::getline(ss, cell, ',')) {
        if (k++ != 16) all += cell;
        all += ',';
      }
      all += '\n';
    }
    return all;
  };
  EXPECT_EQ(strip(dir / "j1.csv"), strip(dir / "j2.csv"));
}
