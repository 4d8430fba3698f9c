#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "serorec/chainio.hpp"
#include "serorec/errors.hpp"
#include "serorec/mcmc.hpp"
#include "serorec/scenario.hpp"
#include "serorec/simulate.hpp"

using namespace serorec;
namespace fs = std::filesystem;

namespace {

ChainOutput small_run() {
  ScenarioConfig cfg = scenario_by_name("realistic");
  cfg.n_in_sample = 4;
  cfg.out_of_sample_taus = {0.25};
  PanelDataset data = simulate_dataset(cfg, "AR1", 0);
  InferenceModel model = InferenceModel::from_model_config(
      cfg.model("AR1"), data.individuals.size() - 1, cfg.sero_interval);
  SamplerConfig sc;
  sc.n_chains = 2;
  sc.iterations = 400;
  sc.burn_in = 200;
  sc.adapt_window = 200;
  sc.thinning = 2;
  sc.seed = 5;
  return run_chain(data, model, sc);
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() /
                   ("serorec_chainio_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("chain output round trips through disk") {
  ChainOutput out = small_run();
  TempDir tmp;
  fs::path manifest = write_chain_output(out, tmp.path / "run");
  CHECK(fs::exists(manifest));

  ChainOutput back = read_chain_output(manifest);
  CHECK(back.param_names == out.param_names);
  REQUIRE(back.chains.size() == out.chains.size());
  for (std::size_t c = 0; c < out.chains.size(); ++c) {
    CHECK(back.chains[c].seed == out.chains[c].seed);
    CHECK(back.chains[c].failed == out.chains[c].failed);
    CHECK(back.chains[c].accept_tau == out.chains[c].accept_tau);
    CHECK(back.chains[c].accept_beta == out.chains[c].accept_beta);
    CHECK((back.chains[c].draws - out.chains[c].draws).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(back.config.n_chains == out.config.n_chains);
  CHECK(back.config.iterations == out.config.iterations);
  CHECK(back.config.burn_in == out.config.burn_in);
  CHECK(back.config.thinning == out.config.thinning);
  CHECK(back.config.seed == out.config.seed);
}

TEST_CASE("failed chains survive the round trip as records") {
  ChainOutput out = small_run();
  out.chains[1].failed = true;
  out.chains[1].error = "synthetic failure, for the record";
  out.chains[1].draws.resize(0, 0);
  TempDir tmp;
  fs::path manifest = write_chain_output(out, tmp.path / "failed");
  ChainOutput back = read_chain_output(manifest);
  REQUIRE(back.chains.size() == 2);
  CHECK(!back.chains[0].failed);
  CHECK(back.chains[1].failed);
  CHECK(back.chains[1].error == "synthetic failure, for the record");
  CHECK(back.n_failed() == 1);
  CHECK(back.pooled(0).size() == static_cast<std::size_t>(out.chains[0].draws.rows()));
}

TEST_CASE("missing and mangled inputs raise parse errors") {
  TempDir tmp;
  CHECK_THROWS_AS((void)read_chain_output(tmp.path / "nope" / "manifest.json"), ParseError);

  ChainOutput out = small_run();
  fs::path manifest = write_chain_output(out, tmp.path / "broken");
  {
    std::ofstream f(manifest, std::ios::trunc);
    f << "{\"schema\": \"wrong/9\"}\n";
  }
  CHECK_THROWS_AS((void)read_chain_output(manifest), ParseError);

  fs::path manifest2 = write_chain_output(out, tmp.path / "broken2");
  // corrupt one chain csv: drop a column from a data row
  fs::path csv;
  for (const auto& e : fs::directory_iterator(tmp.path / "broken2"))
    if (e.path().extension() == ".csv") csv = e.path();
  REQUIRE(!csv.empty());
  {
    std::ofstream f(csv, std::ios::app);
    f << "1.0,2.0\n";
  }
  CHECK_THROWS_AS((void)read_chain_output(manifest2), ParseError);
}
